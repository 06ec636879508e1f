# Copyright 2026 The residual-reach Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the golden evaluation fixture: three short rollout logs and the
metrics table expected from them.

The expected values are computed here with numpy from rotation matrices and
raw joint arrays, without any code from the C++ library.

    python3 make_fixture.py
"""

import json
import math
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
ARM_DOF = 10
CHAIN_HASH = "5eed0000c0ffee01"
PLANT_HASH = "5eed0000c0ffee02"

CONFIGS = {
    "full": {"config_hash": "00000000000000aa", "seed": 7, "goal_adjust": True},
    "no-adjust": {"config_hash": "00000000000000bb", "seed": 7, "goal_adjust": False},
}

# (file, config, episode, final translation error [m], rotation axis, angle [deg])
EPISODES = [
    ("full_0.jsonl", "full", 0, [0.012, -0.004, 0.003], [0.0, 0.0, 1.0], 5.0),
    ("full_1.jsonl", "full", 1, [-0.021, 0.009, 0.014], [1.0, 2.0, 2.0], 12.5),
    ("noadj_0.jsonl", "no-adjust", 0, [0.030, 0.025, -0.011], [0.0, 1.0, 0.0], 28.0),
]


def quat(axis, deg):
    axis = np.asarray(axis, float) / np.linalg.norm(axis)
    h = math.radians(deg) / 2
    return [math.cos(h), *(math.sin(h) * axis)]


def pose(t, q=(1.0, 0.0, 0.0, 0.0)):
    return [float(v) for v in (*t, *q)]


def rotation_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def write_log(name, config, episode, t_err, axis, deg, rng):
    c = CONFIGS[config]
    header = {
        "type": "rollout", "config": config, "config_hash": c["config_hash"], "seed": c["seed"],
        "chain_hash": CHAIN_HASH, "plant_hash": PLANT_HASH, "episode": episode,
        "goal": pose([0.35, -0.2, 0.1]), "horizon": 3, "replan_every": 300,
        "replan": True, "goal_adjust": c["goal_adjust"], "grasp": False,
        "ee_estimator": "neural", "odom_estimator": "neural", "arm_dof": ARM_DOF,
        "replan_failures": 0, "converged": False,
    }
    lines = [json.dumps(header)]
    ticks = []
    for t in range(3):
        scale = 3 - t
        q_ref = rng.uniform(-1, 1, ARM_DOF + 1)
        q_meas = q_ref + rng.normal(0, 0.02, ARM_DOF + 1)
        final_q = quat(axis, deg) if t == 2 else quat(axis, deg * scale)
        err = pose(np.asarray(t_err) * (1 if t == 2 else scale), final_q)
        tick = {
            "t": t, "q_ref": list(q_ref), "q_cmd": list(q_ref), "q_meas": list(q_meas),
            "y_meas": list(rng.uniform(-0.3, 0.3, 6)),
            "err_est": err, "err_true": err,
            "ee_est": pose([0.3, -0.2, 0.1 + 0.01 * t]), "ee_true": pose([0.3, -0.2, 0.1 + 0.01 * t]),
            "base_est": pose([0.001 * t, 0, 0]), "base_true": pose([0.001 * t, 0, 0]),
            "replan": False, "adjust": False, "grasp_closed": False,
        }
        lines.append(json.dumps(tick))
        ticks.append(tick)
    (HERE / name).write_text("\n".join(lines) + "\n")
    return ticks[-1]


def main():
    rng = np.random.default_rng(2026)
    finals = {}
    for name, config, episode, t_err, axis, deg in EPISODES:
        finals.setdefault(config, []).append(write_log(name, config, episode, t_err, axis, deg, rng))

    out = []
    for config in sorted(finals):
        c = CONFIGS[config]
        out.append(f"# config={config} config_hash={c['config_hash']} seed={c['seed']}")
    out.append("config,n,trans_mean_cm,trans_std_cm,rot_mean_deg,rot_std_deg,joint_err_rad")
    for config in sorted(finals):
        ticks = finals[config]
        trans = np.array([100 * np.linalg.norm(t["err_true"][:3]) for t in ticks])
        rot = []
        for t in ticks:
            r = rotation_matrix(t["err_true"][3:])
            rot.append(math.degrees(math.acos(max(-1.0, min(1.0, (np.trace(r) - 1) / 2)))))
        rot = np.array(rot)
        joint = np.mean([np.mean(np.abs(np.subtract(t["q_ref"], t["q_meas"])[-ARM_DOF:])) for t in ticks])
        out.append(
            f"{config},{len(ticks)},{trans.mean():.6f},{trans.std():.6f},"
            f"{rot.mean():.6f},{rot.std():.6f},{joint:.6f}"
        )
    (HERE / "expected_metrics.csv").write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
