"""Constants for the lh1rc simulator."""
import voluptuous as vol

DOMAIN = "lh1rc"
CONFIG_VERSION = 1
CSV_SCHEMA_VERSION = 1
CSV_MAGIC = "lh1rc-observables"
ENV_OUT_DIR = "LH1RC_OUT_DIR"
DEFAULT_OUT_DIR = "lh1rc-out"

# Energies and rates are in units of the nearest-neighbour transfer rate J.
J_UNIT_CM = 20.0

CONF_VERSION = "version"
CONF_MODEL = "model"
CONF_BATH = "bath"
CONF_INITIAL = "initial"
CONF_RUN = "run"
CONF_NOISE = "noise"
CONF_SWEEP = "sweep"
CONF_NAME = "name"

# [model]
CONF_SITES = "M"
CONF_SPACING = "d0"
CONF_OMEGA = "omega"
CONF_OMEGA0 = "omega0"
CONF_DISORDER_SEED = "disorder_seed"
CONF_HOPPING = "hopping"
CONF_HOPPING_DISTANCE = "hopping_distance"
CONF_HOPPING_STRENGTH = "hopping_strength"
CONF_RC_COUPLING = "rc_coupling"
CONF_OMEGA_RC = "omega_rc"
CONF_KAPPA = "kappa"
CONF_RC_ENABLED = "rc_enabled"

# [bath]
CONF_COUPLING = "g"
CONF_DECAY = "gamma"
CONF_BETA = "beta"

# [initial]
CONF_STATE = "state"
CONF_SITE = "site"
CONF_MOMENTUM = "momentum"
CONF_AMPLITUDES = "amplitudes"
CONF_STATE_SEED = "seed"

# [run]
CONF_DT = "dt"
CONF_T_MAX = "t_max"
CONF_STRIDE = "stride"
CONF_TRAJECTORIES = "trajectories"
CONF_SEED = "seed"
CONF_UNRAVELING = "unraveling"
CONF_KERNELS = "kernels"
CONF_SOLVER = "solver"
CONF_THREADS = "threads"

# [noise]
CONF_METHOD = "method"
CONF_N_MODES = "n_modes"
CONF_OMEGA_MAX_FACTOR = "omega_max_factor"

# [sweep]
CONF_PARAMETER = "parameter"
CONF_VALUES = "values"
CONF_READOUT = "readout_time"
CONF_OUTER_PARAMETER = "outer_parameter"
CONF_OUTER_VALUES = "outer_values"

OMEGA_UNIFORM = "uniform"
OMEGA_DISORDER = "disorder"
HOPPING_SMOOTH = "smooth"
HOPPING_NEAREST = "nearest"
HOPPING_NONE = "none"
DISTANCE_PERIODIC = "periodic"
DISTANCE_LINEAR = "linear"

STATE_SITE = "site"
STATE_SYMMETRIC = "symmetric"
STATE_MOMENTUM = "momentum"
STATE_AMPLITUDES = "amplitudes"
STATE_RANDOM = "random"

UNRAVELING_NONLINEAR = "nonlinear"
UNRAVELING_LINEAR = "linear"
KERNELS_MATCHED = "matched"
KERNELS_CLOSED_FORM = "closed-form"
SOLVER_SSE = "sse"
SOLVER_MASTER = "master"

NOISE_EXPONENTIAL = "exponential"
NOISE_MODE_SUM = "mode-sum"
NOISE_CIRCULANT = "circulant"
NOISE_METHODS = [NOISE_EXPONENTIAL, NOISE_MODE_SUM, NOISE_CIRCULANT]

SWEEP_G = "g"
SWEEP_GAMMA = "gamma"
SWEEP_KAPPA = "kappa"
SWEEP_DISORDER = "omega0-disorder"
SWEEP_PARAMETERS = [SWEEP_G, SWEEP_GAMMA, SWEEP_KAPPA, SWEEP_DISORDER]

DEFAULT_SPACING = 0.2
DEFAULT_RC_COUPLING = 0.5
DEFAULT_KAPPA = 1.0
DEFAULT_DECAY = 100.0
BETA_GAMMA = 0.25
DEFAULT_DT = 1e-3
DEFAULT_T_MAX = 5.0
DEFAULT_STRIDE = 10
DEFAULT_TRAJECTORIES = 500
DEFAULT_N_MODES = 400
DEFAULT_OMEGA_MAX_FACTOR = 20.0
MIN_OMEGA_MAX_FACTOR = 5.0
DEFAULT_READOUT = 5.0
DEFAULT_VALIDITY_ORDER = 10
DIMER_CHECK_TRAJECTORIES = 1000
DIMER_CHECK_SAMPLES = 200
DIMER_CHECK_PASS_FRACTION = 0.95

# Trajectories are integrated in fixed-size, zero-padded chunks so the
# arithmetic of every trajectory is independent of worker count.
TRAJECTORY_CHUNK = 16
SELF_CHECK_TOLERANCE = 1e-5
HERMITICITY_WARN = 1e-10
ABSORBED_WARN = 1e-6

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_FLOATS = [vol.Coerce(float)]
_FLOAT_OR_LIST = vol.Any(vol.Coerce(float), _FLOATS)

MODEL_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_SITES): vol.All(int, vol.Range(min=1)),
        vol.Optional(CONF_SPACING, default=DEFAULT_SPACING): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_OMEGA, default=OMEGA_UNIFORM): vol.Any(
            vol.In([OMEGA_UNIFORM, OMEGA_DISORDER]), vol.Coerce(float), _FLOATS
        ),
        vol.Optional(CONF_OMEGA0, default=0.0): vol.Coerce(float),
        vol.Optional(CONF_DISORDER_SEED, default=0): vol.All(int, vol.Range(min=0)),
        vol.Optional(CONF_HOPPING, default=HOPPING_SMOOTH): vol.Any(
            vol.In([HOPPING_SMOOTH, HOPPING_NEAREST, HOPPING_NONE]), [_FLOATS]
        ),
        vol.Optional(CONF_HOPPING_DISTANCE, default=DISTANCE_PERIODIC): vol.In(
            [DISTANCE_PERIODIC, DISTANCE_LINEAR]
        ),
        vol.Optional(CONF_HOPPING_STRENGTH, default=1.0): vol.Coerce(float),
        vol.Optional(CONF_RC_COUPLING, default=DEFAULT_RC_COUPLING): _FLOAT_OR_LIST,
        vol.Optional(CONF_OMEGA_RC): vol.Coerce(float),
        vol.Optional(CONF_KAPPA, default=DEFAULT_KAPPA): vol.Coerce(float),
        vol.Optional(CONF_RC_ENABLED, default=True): bool,
    }
)

BATH_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_COUPLING, default=0.0): _FLOAT_OR_LIST,
        vol.Optional(CONF_DECAY, default=DEFAULT_DECAY): _FLOAT_OR_LIST,
        vol.Optional(CONF_BETA): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
    }
)

INITIAL_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_STATE, default=STATE_SITE): vol.In(
            [STATE_SITE, STATE_SYMMETRIC, STATE_MOMENTUM, STATE_AMPLITUDES, STATE_RANDOM]
        ),
        vol.Optional(CONF_SITE, default=1): vol.All(int, vol.Range(min=1)),
        vol.Optional(CONF_MOMENTUM, default=1): vol.All(int, vol.Range(min=1)),
        # Real list, or list of [re, im] pairs.
        vol.Optional(CONF_AMPLITUDES): vol.Any(_FLOATS, [[vol.Coerce(float)]]),
        vol.Optional(CONF_STATE_SEED, default=0): vol.All(int, vol.Range(min=0)),
    }
)

RUN_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_DT, default=DEFAULT_DT): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_T_MAX, default=DEFAULT_T_MAX): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_STRIDE, default=DEFAULT_STRIDE): vol.All(int, vol.Range(min=1)),
        vol.Optional(CONF_TRAJECTORIES, default=DEFAULT_TRAJECTORIES): vol.All(
            int, vol.Range(min=1)
        ),
        vol.Optional(CONF_SEED, default=0): vol.All(int, vol.Range(min=0)),
        vol.Optional(CONF_UNRAVELING, default=UNRAVELING_NONLINEAR): vol.In(
            [UNRAVELING_NONLINEAR, UNRAVELING_LINEAR]
        ),
        vol.Optional(CONF_KERNELS, default=KERNELS_MATCHED): vol.In(
            [KERNELS_MATCHED, KERNELS_CLOSED_FORM]
        ),
        vol.Optional(CONF_SOLVER, default=SOLVER_SSE): vol.In([SOLVER_SSE, SOLVER_MASTER]),
        vol.Optional(CONF_THREADS, default=1): vol.All(int, vol.Range(min=1)),
    }
)

NOISE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_METHOD, default=NOISE_EXPONENTIAL): vol.In(NOISE_METHODS),
        vol.Optional(CONF_N_MODES, default=DEFAULT_N_MODES): vol.All(int, vol.Range(min=2)),
        vol.Optional(CONF_OMEGA_MAX_FACTOR, default=DEFAULT_OMEGA_MAX_FACTOR): vol.All(
            vol.Coerce(float), vol.Range(min=MIN_OMEGA_MAX_FACTOR)
        ),
    }
)

SWEEP_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_PARAMETER): vol.In(SWEEP_PARAMETERS),
        vol.Required(CONF_VALUES): vol.All(_FLOATS, vol.Length(min=1)),
        vol.Optional(CONF_READOUT, default=DEFAULT_READOUT): vol.Coerce(float),
        vol.Optional(CONF_OUTER_PARAMETER): vol.In(SWEEP_PARAMETERS),
        vol.Optional(CONF_OUTER_VALUES): vol.All(_FLOATS, vol.Length(min=1)),
    }
)

SCENARIO_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_VERSION): vol.All(int, vol.In([CONFIG_VERSION])),
        vol.Optional(CONF_NAME, default="scenario"): str,
        vol.Required(CONF_MODEL): MODEL_SCHEMA,
        vol.Optional(CONF_BATH, default={}): BATH_SCHEMA,
        vol.Optional(CONF_INITIAL, default={}): INITIAL_SCHEMA,
        vol.Optional(CONF_RUN, default={}): RUN_SCHEMA,
        vol.Optional(CONF_NOISE, default={}): NOISE_SCHEMA,
        vol.Optional(CONF_SWEEP): SWEEP_SCHEMA,
    }
)
