"""Frequency-domain and thermal-step identification."""

import warnings

import numpy as np
import pytest

from seaband.defaults import DEFAULT_MOTOR, DEFAULT_SEA, DEFAULT_THERMAL
from seaband.electromech import SeaParams, locked_torque_plant, output_locked_tf
from seaband.errors import (IllPosedFitError, InsufficientDataError,
                            NonStationaryFitWarning, SingularNominalError)
from seaband.lti import RationalTF, freq_response
from seaband.sim import ChirpSpec, run_open_loop_sweep, write_sweep_csv
from seaband.sysid import (FreqDataset, ThermalStepDataset,
                           dataset_from_sweep_csv, fit_third_order,
                           fit_thermal_step, read_freq_csv,
                           read_thermal_step_csv, select_nominal)
from seaband.thermo import integrate_thermal

PLANT = output_locked_tf(DEFAULT_SEA)
NUM_CONST = PLANT.num[-1]  # K_tau / N
TRUE_A = PLANT.den[::-1].copy()  # A0..A3 ascending

# documented fit grid: spans the mechanical pair and the electrical pole
OMEGA = np.logspace(-1, 5, 60)


def complex_dataset(omega=OMEGA):
    return FreqDataset(omega=omega, response=freq_response(PLANT, omega))


def test_fit_complex_noiseless_roundtrip():
    fit = fit_third_order(complex_dataset(), numerator=NUM_CONST)
    assert fit.gain == NUM_CONST
    assert fit.coeffs == pytest.approx(TRUE_A, rel=1e-6)
    assert fit.nrmse < 1e-8
    back = freq_response(fit.tf, OMEGA)
    assert np.max(np.abs(back - freq_response(PLANT, OMEGA))) < 1e-9


def test_fit_magnitude_only_noiseless_roundtrip():
    mags = np.abs(freq_response(PLANT, OMEGA))
    fit = fit_third_order(FreqDataset(omega=OMEGA, response=mags),
                          numerator=NUM_CONST)
    assert fit.coeffs == pytest.approx(TRUE_A, rel=1e-6)


def test_fit_without_anchor_fixes_unit_gain():
    fit = fit_third_order(complex_dataset())
    assert fit.gain == 1.0
    # identifiable up to overall scale: ratios match, and the response does
    assert fit.coeffs * NUM_CONST == pytest.approx(TRUE_A, rel=1e-6)
    back = freq_response(fit.tf, OMEGA)
    assert back == pytest.approx(freq_response(PLANT, OMEGA), rel=1e-6)


def test_fit_tolerates_relative_complex_noise(rng):
    clean = freq_response(PLANT, OMEGA)
    for _ in range(3):
        n = (rng.standard_normal(len(OMEGA))
             + 1j * rng.standard_normal(len(OMEGA))) / np.sqrt(2.0)
        noisy = clean * (1.0 + 0.01 * n)
        fit = fit_third_order(FreqDataset(omega=OMEGA, response=noisy),
                              numerator=NUM_CONST)
        assert fit.coeffs == pytest.approx(TRUE_A, rel=0.02)


def test_fit_coverage_guards():
    with pytest.raises(InsufficientDataError):
        fit_third_order(complex_dataset(np.logspace(0, 2, 7)))
    with pytest.raises(InsufficientDataError):
        fit_third_order(complex_dataset(np.logspace(0, 1.2, 20)))
    with pytest.raises(InsufficientDataError):
        fit_third_order(complex_dataset(np.logspace(0, 2, 3)))


def test_fit_degenerate_data_is_ill_posed():
    with pytest.raises(IllPosedFitError):
        fit_third_order(FreqDataset(omega=OMEGA,
                                    response=np.zeros(len(OMEGA))))
    bad = np.abs(freq_response(PLANT, OMEGA))
    bad[10] = 0.0
    with pytest.raises(IllPosedFitError):
        fit_third_order(FreqDataset(omega=OMEGA, response=bad))


def test_dataset_validation():
    with pytest.raises(ValueError):
        FreqDataset(omega=np.array([2.0, 1.0]), response=np.ones(2))
    with pytest.raises(ValueError):
        FreqDataset(omega=np.array([-1.0, 1.0]), response=np.ones(2))
    with pytest.raises(ValueError):
        FreqDataset(omega=OMEGA, response=np.ones(3))


def test_select_nominal_scaled_family():
    grid = np.logspace(-1, 2, 31)
    family = [RationalTF([0.9 * NUM_CONST], PLANT.den), PLANT,
              RationalTF([1.1 * NUM_CONST], PLANT.den)]
    idx, profile = select_nominal(family, grid)
    assert idx == 1
    assert np.max(profile) == pytest.approx(0.1, rel=1e-9)
    # overall scale does not matter
    idx2, _ = select_nominal([t * RationalTF([3.0], [1.0]) for t in family],
                             grid)
    assert idx2 == 1


def test_select_nominal_inertia_family_matches_direct_search():
    grid = np.logspace(-1, 2, 31)
    family = []
    for scale in (0.8, 1.0, 1.25):
        motor = DEFAULT_MOTOR.__class__(
            R=DEFAULT_MOTOR.R, L=DEFAULT_MOTOR.L, K_e=DEFAULT_MOTOR.K_e,
            K_tau=DEFAULT_MOTOR.K_tau, J_m=scale * DEFAULT_MOTOR.J_m,
            B_m=DEFAULT_MOTOR.B_m)
        family.append(output_locked_tf(SeaParams(
            motor=motor, K_s=DEFAULT_SEA.K_s, N=DEFAULT_SEA.N,
            V_nominal=DEFAULT_SEA.V_nominal)))
    idx, profile = select_nominal(family, grid)

    resp = np.array([freq_response(m, grid) for m in family])
    scores = [np.max(np.abs((resp - resp[n]) / resp[n])) for n in range(3)]
    assert idx == int(np.argmin(scores))
    assert np.max(profile) == pytest.approx(scores[idx], rel=1e-12)


def test_select_nominal_guards():
    with pytest.raises(ValueError):
        select_nominal([PLANT], OMEGA)
    with pytest.raises(SingularNominalError):
        select_nominal([RationalTF([1e-20], [1.0, 1.0]), PLANT],
                       np.logspace(-1, 1, 11))


def test_thermal_step_roundtrip():
    t, tw, th, tm = integrate_thermal(DEFAULT_THERMAL, 1.0, 1200.0, dt=0.05)
    ds = ThermalStepDataset(t=t, T_W=tw, T_H=th, T_M=tm, i_m=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # clean record: no drift complaints
        fit = fit_thermal_step(ds, DEFAULT_THERMAL)
    p = fit.params
    assert p.R1 == pytest.approx(DEFAULT_THERMAL.R1, rel=0.01)
    assert p.R2 == pytest.approx(DEFAULT_THERMAL.R2, rel=0.01)
    assert p.R3 == pytest.approx(DEFAULT_THERMAL.R3, rel=0.01)
    assert p.tau1 == pytest.approx(DEFAULT_THERMAL.tau1, rel=0.02)
    assert p.tau2 == pytest.approx(DEFAULT_THERMAL.tau2, rel=0.02)
    assert not fit.tau3_is_lower_bound
    assert all(v < 0.5 for v in fit.residuals.values())


def test_thermal_step_zero_current_rejected():
    t, tw, th, tm = integrate_thermal(DEFAULT_THERMAL, 1.0, 300.0, dt=0.1)
    ds = ThermalStepDataset(t=t, T_W=tw, T_H=th, T_M=tm, i_m=0.0)
    with pytest.raises(IllPosedFitError):
        fit_thermal_step(ds, DEFAULT_THERMAL)


def test_thermal_step_short_record_warns_and_flags():
    t, tw, th, tm = integrate_thermal(DEFAULT_THERMAL, 1.0, 120.0, dt=0.05)
    ds = ThermalStepDataset(t=t, T_W=tw, T_H=th, T_M=tm, i_m=1.0)
    with pytest.warns(NonStationaryFitWarning):
        fit = fit_thermal_step(ds, DEFAULT_THERMAL)
    assert fit.tau3_is_lower_bound


def test_thermal_step_nonambient_start_warns():
    t, tw, th, tm = integrate_thermal(DEFAULT_THERMAL, 1.0, 1200.0, dt=0.1)
    ds = ThermalStepDataset(t=t, T_W=tw + 5, T_H=th + 5, T_M=tm + 5, i_m=1.0)
    with pytest.warns(NonStationaryFitWarning):
        fit_thermal_step(ds, DEFAULT_THERMAL)


def test_thermal_step_dataset_validation():
    with pytest.raises(ValueError):
        ThermalStepDataset(t=np.array([0.0, 1.0, 2.0]), T_W=np.zeros(3),
                           T_H=np.zeros(3), T_M=np.zeros(3), i_m=1.0)
    with pytest.raises(ValueError):
        ThermalStepDataset(t=np.arange(5.0), T_W=np.zeros(5),
                           T_H=np.zeros(4), T_M=np.zeros(5), i_m=1.0)


def test_read_freq_csv_both_layouts(tmp_path):
    resp = freq_response(PLANT, OMEGA)
    full = tmp_path / "full.csv"
    with open(full, "w") as f:
        f.write("omega_rad_s,response_re,response_im\n")
        for w, r in zip(OMEGA, resp):
            f.write("%.12g,%.12g,%.12g\n" % (w, r.real, r.imag))
    ds = read_freq_csv(full, amplitude=0.3)
    assert not ds.magnitude_only
    assert ds.amplitude == 0.3
    fit = fit_third_order(ds, numerator=NUM_CONST)
    assert fit.coeffs == pytest.approx(TRUE_A, rel=1e-5)

    mag = tmp_path / "mag.csv"
    with open(mag, "w") as f:
        f.write("omega_rad_s,magnitude\n")
        for w, r in zip(OMEGA, resp):
            f.write("%.12g,%.12g\n" % (w, abs(r)))
    ds2 = read_freq_csv(mag)
    assert ds2.magnitude_only
    fit2 = fit_third_order(ds2, numerator=NUM_CONST)
    assert fit2.coeffs == pytest.approx(TRUE_A, rel=1e-5)

    bad = tmp_path / "bad.csv"
    bad.write_text("hz,mag\n1.0,2.0\n")
    with pytest.raises(IllPosedFitError):
        read_freq_csv(bad)


def test_dataset_from_sweep_csv(tmp_path):
    chirp = ChirpSpec(1.0, 0.1, 80.0, sweep_rate=0.5)
    result = run_open_loop_sweep(0.05, chirp)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(path, result)
    ds = dataset_from_sweep_csv(path, amplitude=0.05)
    assert ds.magnitude_only
    assert len(ds.omega) == len(result.freq_grid)
    assert ds.omega == pytest.approx(2 * np.pi * result.freq_grid)

    # the torque-per-pwm scale lives in the numerator, so anchoring on it
    # recovers the same denominator coefficients
    torque_num = locked_torque_plant(DEFAULT_SEA).num[-1]
    fit = fit_third_order(ds, numerator=torque_num)
    assert fit.coeffs[:3] == pytest.approx(TRUE_A[:3], rel=0.03)
    # the sweep tops out far below the electrical pole, so the cubic
    # term is only order-of-magnitude identifiable from envelope data
    assert fit.coeffs[3] == pytest.approx(TRUE_A[3], rel=1.0)

    other = tmp_path / "other.csv"
    other.write_text("a,b\n1,2\n")
    with pytest.raises(IllPosedFitError):
        dataset_from_sweep_csv(other)


def test_read_thermal_step_csv(tmp_path):
    t, tw, th, tm = integrate_thermal(DEFAULT_THERMAL, 0.8, 50.0, dt=0.5)
    path = tmp_path / "step.csv"
    with open(path, "w") as f:
        f.write("time_s,winding_temp_c,housing_temp_c,mount_temp_c\n")
        for row in zip(t, tw, th, tm):
            f.write("%.10g,%.10g,%.10g,%.10g\n" % row)
    ds = read_thermal_step_csv(path, i_m=0.8)
    assert ds.i_m == 0.8
    assert ds.T_W == pytest.approx(tw, rel=1e-9)

    bad = tmp_path / "bad.csv"
    bad.write_text("time_s,w\n0,1\n")
    with pytest.raises(IllPosedFitError):
        read_thermal_step_csv(bad, i_m=1.0)
