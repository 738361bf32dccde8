import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from obldamp.building import MrDamperParams, StoryParams, assemble_model, load_building
from obldamp.errors import DegenerateRecordError, InputError, SimulationError
from obldamp.ground_motion import GroundMotion, generate_white_noise, scale_to_pga
from obldamp.simulation import (ResponseHistory, _free_response, drift_ratio_sum, integrate, objective_value,
                                peak_drifts, performance_indices, response_norm)

LINEAR = MrDamperParams(mode="linear_viscous")


def _sdof(omega=2 * math.pi, zeta=0.0, mass=1.0):
    k = mass * omega ** 2
    return assemble_model([StoryParams(mass, k, 2 * zeta * omega * mass)])


def _history(drifts, acc=None, dt=0.01, masses=None):
    drifts = np.asarray(drifts, dtype=float)
    disp = np.cumsum(drifts, axis=1)
    acc = np.zeros_like(disp) if acc is None else np.asarray(acc, dtype=float)
    masses = np.ones(disp.shape[1]) if masses is None else masses
    return ResponseHistory(dt, disp, np.zeros_like(disp), acc, np.zeros_like(disp), masses)


# ------------------------------------------------------------------ integrator accuracy

def test_zero_excitation_gives_zero_response():
    model = load_building(stories=6)
    h = integrate(model, np.ones(6), GroundMotion(0.01, np.zeros(300)))
    assert not h.displacements.any() and not h.absolute_accelerations.any()


def test_sdof_free_vibration_matches_cosine():
    omega = 2 * math.pi
    period = 1.0
    dt = period / 100
    h = _free_response(_sdof(omega), np.array([1.0]), dt, 1000)
    x = h.displacements[:, 0]
    t = h.time
    exact = np.cos(omega * t)
    # amplitude: average-acceleration Newmark is non-dissipative
    last = x[-100:]
    assert abs(np.max(np.abs(last)) - 1.0) < 0.01
    # period from upward zero crossings
    up = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))
    frac = x[up] / (x[up] - x[up + 1])
    crossings = (up + frac) * dt
    measured = np.mean(np.diff(crossings))
    assert abs(measured - period) / period < 0.005
    # pointwise tracking over the first cycle
    assert np.max(np.abs(x[:101] - exact[:101])) < 0.01


def test_multistory_energy_conserved():
    stories = [StoryParams(s.mass, s.stiffness, 0.0) for s in load_building(stories=10).stories]
    model = assemble_model(stories)
    w = np.sqrt(np.linalg.eigvalsh(np.linalg.solve(model.M, model.K)))
    t1 = 2 * math.pi / w.min()
    dt = t1 / 200
    x0 = np.linspace(0.001, 0.01, 10)
    h = _free_response(model, x0, dt, 2000)
    kinetic = 0.5 * np.einsum("ti,i,ti->t", h.velocities, h.masses, h.velocities)
    strain = 0.5 * np.einsum("ti,ij,tj->t", h.displacements, model.K, h.displacements)
    energy = kinetic + strain
    assert np.max(np.abs(energy / energy[0] - 1)) < 1e-3


@pytest.mark.parametrize("ratio", [1.0, 0.5, 1.7])
def test_damped_sdof_harmonic_steady_state(ratio):
    omega_n, zeta, amp = 2 * math.pi, 0.05, 1.0
    omega = ratio * omega_n
    dt = (2 * math.pi / omega_n) / 100
    steps = int(80.0 / dt)
    t = np.arange(steps + 1) * dt
    h = _free_response(_sdof(omega_n, zeta), np.zeros(1), dt, steps, ag=amp * np.sin(omega * t))
    tail = h.displacements[t > 60.0, 0]
    measured = 0.5 * (tail.max() - tail.min())
    exact = amp / omega_n ** 2 / math.sqrt((1 - ratio ** 2) ** 2 + (2 * zeta * ratio) ** 2)
    assert abs(measured / exact - 1) < 0.02


def test_substepped_record_reports_record_rate():
    model = load_building(stories=4)
    coarse = generate_white_noise(3, duration=4, dt=0.02, cutoff_hz=20)
    h = integrate(model, np.ones(4), coarse)
    assert h.steps == coarse.accel.size and h.dt == 0.02
    # same record sampled at 0.005 by interpolation gives identical peaks
    fine_t = np.arange(0, (coarse.accel.size - 1) * 4 + 1) * 0.005
    fine = GroundMotion(0.005, np.interp(fine_t, coarse.time, coarse.accel))
    hf = integrate(model, np.ones(4), fine)
    np.testing.assert_allclose(hf.displacements[::4], h.displacements, rtol=1e-9, atol=1e-15)


def test_linear_superposition():
    model = load_building(stories=12)
    motion = generate_white_noise(9, duration=8)
    layout = np.array([1, 2, 0, 0, 3, 0, 1, 0, 0, 2, 0, 1], dtype=float)
    big = LINEAR.__class__(**{**LINEAR.__dict__, "f_max": 1e12})
    a = integrate(model, layout, motion, big)
    b = integrate(model, layout, scale_to_pga(motion, 2 * motion.pga), big)
    np.testing.assert_allclose(b.displacements, 2 * a.displacements, rtol=1e-12, atol=1e-18)
    np.testing.assert_allclose(b.absolute_accelerations, 2 * a.absolute_accelerations, rtol=1e-12, atol=1e-15)
    ua = integrate(model, None, motion, big)
    ub = integrate(model, None, scale_to_pga(motion, 2 * motion.pga), big)
    ja = performance_indices(a, ua).as_tuple()
    jb = performance_indices(b, ub).as_tuple()
    np.testing.assert_allclose(ja, jb, rtol=1e-12)


def test_peak_drift_path_matches_histories():
    model = load_building()
    motion = generate_white_noise(1, duration=6)
    layout = np.zeros(40)
    layout[[3, 9, 20]] = [5, 2, 1]
    h = integrate(model, layout, motion)
    np.testing.assert_array_equal(peak_drifts(model, layout, motion), h.peak_drifts())


def test_simulation_error_on_nonconvergence():
    model = load_building(stories=3)
    stiff = MrDamperParams(c0=1e5, alpha=5e10, A_bw=1e3, f_max=1e15)
    with pytest.raises(SimulationError) as info:
        integrate(model, np.full(3, 5.0), generate_white_noise(0, duration=2), stiff)
    assert info.value.step is not None and info.value.step >= 1


def test_simulation_error_on_overflow():
    model = load_building(stories=3)
    with pytest.raises(SimulationError):
        integrate(model, None, GroundMotion(0.01, np.full(50, 1e306)))


def test_layout_length_checked():
    with pytest.raises(InputError):
        integrate(load_building(stories=3), np.ones(4), generate_white_noise(0, duration=1))


# ------------------------------------------------------------------ response history

def test_history_shapes_and_csv():
    model = load_building()
    h = integrate(model, None, generate_white_noise(0))
    assert h.displacements.shape == (2000, 40)
    np.testing.assert_array_equal(h.drifts[:, 0], h.displacements[:, 0])
    np.testing.assert_allclose(h.base_shear, h.absolute_accelerations @ model.masses)
    text = h.to_csv()
    lines = text.splitlines()
    assert len(lines) == 2001
    header = lines[0].split(",")
    assert header[0] == "time" and header[1] == "drift_1" and header[41] == "acc_1" and header[-1] == "base_shear"
    assert len(lines[1].split(",")) == 82


# ------------------------------------------------------------------ objective and indices

def test_objective_identity_and_half():
    u = _history(np.tile([[1.0, -2.0, 3.0, 0.5]], (5, 1)) * np.arange(1, 6)[:, None])
    assert objective_value(u, u) == 4.0
    c = _history(u.drifts / 2)
    assert objective_value(c, u) == 2.0


def test_objective_forty_stories():
    d = np.random.default_rng(0).normal(size=(50, 40))
    u = _history(d)
    assert objective_value(u, u) == 40.0
    assert objective_value(_history(d / 2), u) == pytest.approx(20.0, rel=1e-14)


def test_objective_degenerate():
    u = _history(np.array([[1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(DegenerateRecordError):
        objective_value(u, u)
    with pytest.raises(InputError):
        drift_ratio_sum([1.0, 2.0], [1.0])


def test_response_norm_examples():
    assert response_norm(np.full(100, -3.0), 0.01) == pytest.approx(3.0)
    assert response_norm(np.zeros(10), 0.1) == 0.0
    t = np.linspace(0, 4 * math.pi, 40001)[:-1]
    assert response_norm(np.sin(t), t[1]) == pytest.approx(1 / math.sqrt(2), rel=1e-9)
    with pytest.raises(InputError):
        response_norm(np.array([]), 0.1)


def test_indices_self_and_zero():
    rng = np.random.default_rng(1)
    u = _history(rng.normal(size=(30, 3)), rng.normal(size=(30, 3)), masses=np.array([1.0, 2.0, 3.0]))
    assert performance_indices(u, u).as_tuple() == (1.0,) * 6
    z = _history(np.zeros((30, 3)), np.zeros((30, 3)), masses=u.masses)
    assert performance_indices(z, u).as_tuple() == (0.0,) * 6


def test_indices_definitions():
    # two stories, hand-picked series
    drift_u = np.array([[1.0, -2.0], [0.5, 1.0]])
    acc_u = np.array([[2.0, 1.0], [-4.0, 0.0]])
    drift_c = np.array([[0.5, -1.0], [0.25, 0.5]])
    acc_c = np.array([[1.0, 1.0], [-1.0, 0.0]])
    m = np.array([1.0, 1.0])
    u = _history(drift_u, acc_u, dt=0.5, masses=m)
    c = _history(drift_c, acc_c, dt=0.5, masses=m)
    j = performance_indices(c, u)
    assert j.j1 == 0.5
    assert j.j2 == 1.0 / 4.0
    assert j.j3 == 2.0 / 4.0
    assert j.j4 == pytest.approx(0.5)
    assert j.j5 == pytest.approx(math.sqrt(1.0) / math.sqrt(10.0))
    # base shear [3, -4] vs [2, -1]
    assert j.j6 == pytest.approx(math.sqrt(2.5 / 12.5))


def test_indices_zero_normalizer():
    u = _history(np.zeros((4, 2)))
    with pytest.raises(DegenerateRecordError):
        performance_indices(u, u)


def test_indices_shape_mismatch():
    with pytest.raises(InputError):
        performance_indices(_history(np.ones((3, 2))), _history(np.ones((4, 2))))


# ------------------------------------------------------------------ frame-level properties

@pytest.fixture(scope="module")
def frame():
    model = load_building()
    motion = generate_white_noise(1)
    return model, motion, peak_drifts(model, None, motion, LINEAR)


@settings(max_examples=15)
@given(st.lists(st.integers(0, 5), min_size=40, max_size=40).filter(any))
def test_linear_dampers_always_help(frame, counts):
    model, motion, unc = frame
    value = drift_ratio_sum(peak_drifts(model, np.array(counts, dtype=float), motion, LINEAR), unc)
    assert value < 40.0


def test_zero_layout_indices_are_one(frame):
    model, motion, _ = frame
    u = integrate(model, None, motion)
    c = integrate(model, np.zeros(40), motion)
    assert objective_value(c, u) == 40.0
    assert performance_indices(c, u).as_tuple() == (1.0,) * 6
