"""Uniform result carrier for every separability test in the package.

Each test compares a computed quantity ("left") against a bound that all
separable states satisfy ("right"): the state is flagged as entangled
("detected") exactly when left exceeds right by more than the tolerance,
i.e. when margin = right - left < -tol.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CriterionVerdict:
    criterion: str
    left: float
    right: float
    margin: float
    detected: bool
    tol: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "criterion": self.criterion,
            "left": self.left,
            "right": self.right,
            "margin": self.margin,
            "detected": self.detected,
            "tol": self.tol,
            "details": self.details,
        }


def make_verdict(criterion, left, right, tol=1e-10, details=None):
    """Build a CriterionVerdict enforcing detected <=> margin < -tol."""
    left = float(left)
    right = float(right)
    margin = right - left
    return CriterionVerdict(
        criterion=criterion,
        left=left,
        right=right,
        margin=margin,
        detected=bool(margin < -tol),
        tol=float(tol),
        details=dict(details or {}),
    )
