"""The three solvable coagulation kernels and their admissible classes."""

import enum
from dataclasses import dataclass


class KernelKind(enum.Enum):
    """Solvable kernels ``K = 2``, ``K = x + y`` and ``K = x y``."""

    CONSTANT = "const"
    ADDITIVE = "add"
    MULTIPLICATIVE = "mult"

    @property
    def gamma(self) -> int:
        """Homogeneity degree of the kernel."""
        return {"const": 0, "add": 1, "mult": 2}[self.value]

    @property
    def k_constant(self) -> float:
        """Time-scale constant fixing the self-similar time map."""
        return {"const": 1.0, "add": 2.0, "mult": 1.0}[self.value]

    def rate(self, x, y):
        if self is KernelKind.CONSTANT:
            return 2.0 + 0.0 * (x + y)
        if self is KernelKind.ADDITIVE:
            return x + y
        return x * y

    def theorem_rate(self, kappa: float) -> float:
        """Contraction exponent guaranteed for weight ``kappa``."""
        if self is KernelKind.CONSTANT:
            return kappa - 1.0
        return 0.5 * (kappa - 2.0)

    @property
    def theorem_kappa_range(self):
        """Open/closed interval of weights for which contraction holds.

        Returned as ``(lo, hi, hi_inclusive)``; the lower end is always open.
        """
        if self is KernelKind.CONSTANT:
            return (1.0, 2.0, True)
        return (2.0, 3.0, False)

    @property
    def norm_kappa_range(self):
        """Closed interval of weights for which the norm is finite."""
        if self is KernelKind.CONSTANT:
            return (0.0, 2.0)
        return (0.0, 3.0)

    def in_theorem_range(self, kappa: float) -> bool:
        lo, hi, inclusive = self.theorem_kappa_range
        return lo < kappa < hi or (inclusive and kappa == hi)

    @classmethod
    def parse(cls, value) -> "KernelKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "const": cls.CONSTANT, "constant": cls.CONSTANT,
            "add": cls.ADDITIVE, "additive": cls.ADDITIVE,
            "mult": cls.MULTIPLICATIVE, "multiplicative": cls.MULTIPLICATIVE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown kernel {value!r}") from None


@dataclass(frozen=True)
class AdmissibleClass:
    """Densities whose two conserved moments equal one.

    ``required_moments`` are the indices fixed to 1 and
    ``finiteness_moment`` the index that must be finite.
    """

    kernel: KernelKind

    @property
    def required_moments(self):
        return {"const": (0, 1), "add": (1, 2), "mult": (2, 3)}[self.kernel.value]

    @property
    def finiteness_moment(self) -> int:
        return self.required_moments[1] + 1

    @classmethod
    def of(cls, kernel) -> "AdmissibleClass":
        return cls(KernelKind.parse(kernel))
