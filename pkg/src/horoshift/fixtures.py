"""Shipped group and ray fixtures (JSON under ``horoshift/data``)."""
from __future__ import annotations

from importlib import resources

from .group_model import GroupSpec, RayWalk, load_group, load_ray

GROUPS = ("z2", "f2", "z2_star_z")

# ray name -> group name
RAYS = {
    "z2_x_axis": "z2",
    "z2_y_axis": "z2",
    "z2_staircase_red": "z2",
    "z2_staircase_blue": "z2",
    "f2_a": "f2",
    "f2_a_inv": "f2",
    "f2_b": "f2",
    "z2_star_z_increasing_powers": "z2_star_z",
}

# rays whose Busemann fields are part of the fixture suite, per group
BUSEMANN_FIXTURES = {
    "z2": ("z2_x_axis", "z2_y_axis", "z2_staircase_red", "z2_staircase_blue"),
    "f2": ("f2_a", "f2_a_inv", "f2_b"),
    "z2_star_z": ("z2_star_z_increasing_powers",),
}


def data_path(*parts):
    return resources.files("horoshift").joinpath("data", *parts)


def group(name: str) -> GroupSpec:
    return load_group(str(data_path("groups", f"{name}.json")))


def ray(name: str, grp: GroupSpec | None = None) -> RayWalk:
    grp = grp or group(RAYS[name])
    return load_ray(grp, str(data_path("rays", f"{name}.json")))
