from enum import Enum

class OrderByType(str, Enum):
    """
    Type to establish the ordering of stored evaluation runs.

    It can be ASC or DESC.
    """
    ASC = 'asc'
    DESC = 'desc'

class EvaluationMode(str, Enum):
    """
    How the sequences of a scene are evaluated.

    Attributes:
        PER_SEQUENCE: Each sequence is aligned on its own.
        LIFELONG: The first sequence's alignment is propagated to all sequences.
        PAIR: Controlled-factor pairs, re-localization score of the second sequence.
    """
    PER_SEQUENCE = 'per_sequence'
    LIFELONG = 'lifelong'
    PAIR = 'pair'

class AlignmentMethod(str, Enum):
    HORN = 'horn'
    UMEYAMA = 'umeyama'

class RPEUnit(str, Enum):
    SECONDS = 'seconds'
    FRAMES = 'frames'

class SceneKind(str, Enum):
    """Scene kinds with a default ATE threshold; CUSTOM falls back to the global default."""
    OFFICE = 'office'
    HOME = 'home'
    CAFE = 'cafe'
    CORRIDOR = 'corridor'
    MARKET = 'market'
    CUSTOM = 'custom'

class TrajectoryShape(str, Enum):
    LOOP = 'loop'
    CORRIDOR = 'corridor'
    U_SHAPE = 'u-shape'
    BACK_AND_FORTH = 'back-and-forth'

class CorrectnessStatus(str, Enum):
    CORRECT = 'correct'
    INCORRECT = 'incorrect'
    ABSENT = 'absent'

class EventKind(str, Enum):
    INITIALIZATION = 'initialization'
    RELOCALIZATION = 'relocalization'
