# Decimal expansion of pi, 200 places after the point.
PI_DIGITS = (
    "3."
    "14159265358979323846264338327950288419716939937510"
    "58209749445923078164062862089986280348253421170679"
    "82148086513282306647093844609550582231725359408128"
    "48111745028410270193852110555964462294895493038196"
)

MAX_PI_DIGITS = 120

DECIMAL_DIGITS = 12

EXIT_OK = 0
EXIT_CLAIM_FAILED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3
