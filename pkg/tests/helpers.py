"""Shared builders for the test suite."""

import numpy as np

import dampedwave as dw
from dampedwave import config as cfg
from dampedwave import solver


def example1_profile(grid, V0=0.01, beta=2.0, L=1.0, eps1=1.0, ramp="sharp"):
    V = dw.build_potential_example1(V0, beta, L, grid)
    a = dw.build_damping_plateau(eps1, L, ramp, grid)
    return dw.make_profile(grid, V, a, L, eps1, beta=beta, V0=V0)


def reference_profile(n_cells):
    """The linear reference setup: example-1 potential (V0=0.01, beta=2,
    L=1) with a sharp unit damping plateau on [-60, 60]."""
    return example1_profile(dw.Grid(-60.0, 60.0, n_cells))


def reference_data(grid, amplitude=1e-3, width=1.5):
    u0 = dw.gaussian_bump(grid, amplitude, width)
    return dw.make_initial_data(grid, u0, np.zeros(grid.n_nodes))


def reference_run_config(profile, data, t_end, record_every=10):
    return solver.RunConfig(profile=profile, data=data, t_end=t_end,
                            cfl=0.9, record_every=record_every)


def reference_spec(n_cells=6000, t_end=50.0, record_every=10):
    return cfg.RunSpec(
        grid=cfg.GridSpec(mode="explicit", x_min=-60.0, x_max=60.0, n_cells=n_cells),
        potential=cfg.PotentialSpec(family="example1", V0=0.01, beta=2.0, L=1.0),
        damping=cfg.DampingSpec(family="plateau", eps1=1.0, L=1.0, ramp="sharp"),
        data=cfg.DataSpec(
            u0=cfg.FieldSpec(kind="gaussian", amplitude=1e-3, width=1.5, center=0.0),
            u1=cfg.FieldSpec(kind="zero"),
        ),
        time=cfg.TimeSpec(t_end=t_end, cfl=0.9, record_every=record_every),
        nonlinearity=cfg.NonlinearitySpec(kind="none"),
    )


LINEAR_DEMO_CFG = """\
[grid]
mode = explicit
x_min = -60.0
x_max = 60.0
n_cells = 3000

[potential]
family = example1
V0 = 0.01
beta = 2.0
L = 1.0

[damping]
family = plateau
eps1 = 1.0
L = 1.0
ramp = sharp

[data]
u0_kind = gaussian
u0_amplitude = 0.001
u0_width = 1.5
u1_kind = zero

[time]
t_end = 30.0
cfl = 0.9
record_every = 10

[nonlinearity]
kind = none
"""
