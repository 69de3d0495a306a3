"""Pass/fail check reports shared by the verification operations."""

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    passed: bool
    value: float = float("nan")
    bound: float = float("nan")
    note: str = ""


@dataclass
class CheckReport:
    title: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, name, passed, value=float("nan"), bound=float("nan"), note=""):
        self.checks.append(Check(name, bool(passed), float(value), float(bound), note))
        return self

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [vars(c) for c in self.checks],
            "data": self.data,
        }

    def lines(self):
        for c in self.checks:
            yield f"{'PASS' if c.passed else 'FAIL'}  {c.name}  value={c.value:.6g}  bound={c.bound:.6g} {c.note}".rstrip()
