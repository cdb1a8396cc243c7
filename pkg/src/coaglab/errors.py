"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` so the command line
front end can report it without parsing messages.
"""


class CoagError(Exception):
    code = "coag-error"


class MomentDivergenceError(CoagError, ArithmeticError):
    code = "moment-divergence"

    def __init__(self, order, detail=""):
        self.order = order
        msg = f"moment of order {order} diverges"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DegenerateDensityError(CoagError, ValueError):
    code = "degenerate-density"


class NonAdmissibleTransformError(CoagError, ValueError):
    code = "non-admissible-transform"


class CharacteristicCrossingError(CoagError, ArithmeticError):
    code = "characteristic-crossing"


class SupNotBracketedError(CoagError, ArithmeticError):
    code = "sup-not-bracketed"

    def __init__(self, side, eta, ratio, tau=None, kappa=None):
        self.side = side
        self.eta = eta
        self.ratio = ratio
        self.tau = tau
        self.kappa = kappa
        msg = (f"weighted ratio still increasing at the {side} end of the grid "
               f"(eta={eta:.6g}, ratio={ratio:.6g}); extend the eta grid")
        if tau is not None:
            msg += f" [tau={tau:g}, kappa={kappa:g}]"
        super().__init__(msg)

    def at(self, tau, kappa):
        """Copy of the error tagged with the checkpoint that raised it."""
        return SupNotBracketedError(self.side, self.eta, self.ratio, tau, kappa)


class MomentMismatchError(CoagError, ValueError):
    code = "moment-mismatch"


class StabilityError(CoagError, ValueError):
    code = "dt-too-large"


class PositivityLossError(CoagError, ArithmeticError):
    code = "positivity-loss"


class ConfigError(CoagError, ValueError):
    code = "config-error"
