"""Series elastic actuator bandwidth and thermal analysis toolkit.

Models a gear-motor + series spring actuator together with its lumped
thermal network, runs chirp-sweep torque-bandwidth experiments under
winding-temperature limits, and provides the control stack (PID,
disturbance observer, thermal throttle) that maximizes the accessible
torque bandwidth: the lower of the -3 dB frequency and the frequency at
which the winding first hits its temperature ceiling.
"""

from .control import (ControlStack, DobConfig, PidConfig,
                      ThermalRegulatorConfig, closed_loop_predicted_tf,
                      default_pid_config, dob_step, pid_step,
                      thermal_regulate)
from .defaults import DEFAULT_MOTOR, DEFAULT_SEA, DEFAULT_THERMAL, LOCKED_LOAD
from .electromech import (LoadParams, MotorParams, SeaParams, electrical_tf,
                          load_tf, locked_torque_plant, mechanical_tf,
                          mimo_matrix, output_locked_tf, uncertainty,
                          voltage_tf)
from .errors import (ConfigError, DivergenceError, DiscretizationSingularityError,
                     EvaluationSingularityError, IllPosedFitError,
                     ImproperTransferFunctionError, IndeterminateBandwidthError,
                     InsufficientDataError, NoBandwidthError,
                     NonStationaryFitWarning, SamplingAdequacyError,
                     SeabandError, SingularNominalError, ThermalRunawayError,
                     ZeroHeadroomError)
from .lti import (DiscreteTF, RationalTF, StateSpace, bandwidth_3db,
                  butterworth_lowpass, discretize, freq_response, tf_to_ss)
from .sim import (ChirpSpec, SimConfig, SweepResult, TimeTraces,
                  accessible_bandwidth, extract_envelope, integrate_coupled,
                  run_closed_loop_sweep, run_open_loop_family,
                  run_open_loop_sweep, sine_response, sweep_summary,
                  write_sweep_csv, write_sweep_summary_json)
from .sysid import (FreqDataset, ThermalFit, ThermalStepDataset, TfFit,
                    fit_thermal_step, fit_third_order, select_nominal)
from .thermo import (OverloadBudget, ThermalParams, ThermalState,
                     WindingTempEstimator, estimate_from_telemetry,
                     estimate_winding_temp, integrate_thermal, joule_power,
                     nominal_current, overload_budget, overload_transient,
                     steady_state_winding_temp, thermal_derivatives)

__version__ = "0.1.0"
