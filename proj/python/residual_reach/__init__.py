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

"""Python access to the reach library: pose algebra, kinematics, alignment,
grasp retargeting and rollout metrics."""

from ._core import (
    AlreadyRetargeted,
    ConfigError,
    DegenerateInput,
    HashMismatch,
    KinematicChain,
    NoFeasibleGrasp,
    ParseError,
    Pose,
    ReachError,
    ValidationError,
    adjust_goal,
    compose,
    config_hash,
    fk,
    inv_compose,
    kabsch_umeyama,
    load_chain,
    parse_chain,
    retarget_to_hand,
    rollout_metrics,
)

__all__ = [
    "AlreadyRetargeted",
    "ConfigError",
    "DegenerateInput",
    "HashMismatch",
    "KinematicChain",
    "NoFeasibleGrasp",
    "ParseError",
    "Pose",
    "ReachError",
    "ValidationError",
    "adjust_goal",
    "compose",
    "config_hash",
    "fk",
    "inv_compose",
    "kabsch_umeyama",
    "load_chain",
    "parse_chain",
    "retarget_to_hand",
    "rollout_metrics",
]
