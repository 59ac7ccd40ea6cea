#!/usr/bin/env python3
# Copyright 2026 The OptiWB Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes data/demo_scene.json: a rover arm sweeping its tool along a
40-waypoint path while the mast camera tracks a ground target."""

import argparse
import json
import math


def deg(d):
    return d * math.pi / 180.0


def translation(x, y, z):
    return {"translation": [x, y, z], "rotation": [1.0, 0.0, 0.0, 0.0]}


def robot(acc_max):
    offsets = [0.1575, 0.2025, 0.2045, 0.2155, 0.1845, 0.2155, 0.081]
    limits = [170, 120, 170, 120, 170, 120, 175]
    velocities = [85, 85, 100, 75, 130, 135, 135]
    joints = []
    for k in range(7):
        axis = [0.0, 0.0, 1.0] if k % 2 == 0 else [0.0, 1.0, 0.0]
        if k == 3:
            axis = [0.0, -1.0, 0.0]
        joints.append({
            "name": "a%d" % (k + 1),
            "axis": axis,
            "origin": translation(0.0, 0.0, offsets[k]),
            "pos_min": -deg(limits[k]),
            "pos_max": deg(limits[k]),
            "vel_max": deg(velocities[k]),
            "acc_max": acc_max,
        })

    def capsule(name, frame, radius, length, start=0.0):
        return {"name": name, "frame": frame,
                "volume": {"type": "capsule", "radius": radius, "a": [0.0, 0.0, start], "b": [0.0, 0.0, length]}}

    volumes = [
        {"name": "chassis", "frame": 0,
         "volume": {"type": "box", "half_extents": [0.5, 0.35, 0.2], "pose": translation(0.0, 0.0, 0.4)}},
        {"name": "mast", "frame": 0,
         "volume": {"type": "capsule", "radius": 0.04, "a": [0.25, 0.2, 0.6], "b": [0.25, 0.2, 1.02]}},
        capsule("link1", 1, 0.08, 0.0, -0.1575),
        capsule("link2", 2, 0.07, 0.2045),
        capsule("link3", 3, 0.07, 0.2155),
        capsule("link4", 4, 0.065, 0.1845),
        capsule("link5", 5, 0.065, 0.12),
        capsule("link6", 6, 0.06, 0.0),
        capsule("link7", 7, 0.045, 0.045),
    ]
    tilt = deg(15.0)
    return {
        "base_limits": {"v_max": 0.2, "omega_max": 0.4},
        "arm_joints": joints,
        "arm_mount_transform": translation(0.35, -0.12, 0.6),
        "tool_transform": translation(0.0, 0.0, 0.045),
        "link_volumes": volumes,
        "camera_transform": {"translation": [0.25, 0.2, 1.1],
                             "rotation": [math.cos(tilt / 2), 0.0, math.sin(tilt / 2), 0.0]},
        "camera_ccd": {"width": 0.008, "height": 0.006, "focal": 0.006},
    }


def task(count=40, duration=39.0):
    waypoints = []
    for i in range(count):
        u = i / (count - 1)
        s = u * u * (3.0 - 2.0 * u)
        waypoints.append({
            "t": duration * u,
            "position": [3.0 * s, 1.5 * s * s * (3.0 - 2.0 * s), 1.15 - 0.9 * s],
            # tool pointing down
            "orientation": [0.0, 1.0, 0.0, 0.0],
            "fixed_joints": [{"joint": 2, "value": 0.0}],
        })
    return {"waypoints": waypoints}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data/demo_scene.json")
    parser.add_argument("--no-forbidden", action="store_true")
    parser.add_argument("--target", type=float, nargs=3, default=[4.2, 2.4, 0.0])
    parser.add_argument("--sun", type=float, nargs=2, default=[-2.6, 0.3])
    parser.add_argument("--acc-max", type=float, default=2.0)
    args = parser.parse_args()
    scene = {
        "obstacles": [
            {"type": "box", "half_extents": [0.25, 0.3, 0.3], "pose": translation(4.3, 0.2, 0.3)},
        ],
        "forbidden_areas": [] if args.no_forbidden else [
            {"type": "polygon", "vertices": [[0.62, 0.66], [1.13, 0.61], [1.18, 1.14], [0.67, 1.17]]},
        ],
        "sun": {"azimuth": args.sun[0], "elevation": args.sun[1]},
        "target": args.target,
    }
    doc = {
        "format": "optiwb-scene/1",
        "robot": robot(args.acc_max),
        "scene": scene,
        "task": task(),
        "config": {"grid": {"dx": 0.1, "dy": 0.1, "dh": 0.2}, "sigma": 0.95},
    }
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
