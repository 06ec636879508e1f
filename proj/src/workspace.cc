// Copyright 2026 The residual-reach Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reach/workspace.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "reach/errors.h"

namespace reach {

Vec3 WorkspaceMap::center(int ix, int iy, int iz) const {
  return bounds.lo + resolution * Vec3(ix + 0.5, iy + 0.5, iz + 0.5);
}

std::vector<JointVector> workspace_seeds(const KinematicChain& chain, int count) {
  return spread_seeds(chain, count);
}

WorkspaceMap estimate_workspace(const KinematicChain& chain, const Box& bounds,
                                double resolution, const WorkspaceConfig& cfg) {
  if (!(resolution > 0.0)) throw Error("workspace resolution must be positive");
  WorkspaceMap map;
  map.bounds = bounds;
  map.resolution = resolution;
  for (int a = 0; a < 3; ++a) {
    double extent = bounds.hi[a] - bounds.lo[a];
    if (!(extent > 0.0)) throw Error("workspace bounds are degenerate");
    map.dims[a] = std::max(1, static_cast<int>(std::lround(extent / resolution)));
  }
  const std::size_t total =
      static_cast<std::size_t>(map.dims[0]) * map.dims[1] * map.dims[2];
  map.reachable.assign(total, 0);

  const auto seeds = workspace_seeds(chain, cfg.num_seeds);
  auto evaluate = [&](std::size_t idx) {
    int ix = static_cast<int>(idx % map.dims[0]);
    int iy = static_cast<int>((idx / map.dims[0]) % map.dims[1]);
    int iz = static_cast<int>(idx / (static_cast<std::size_t>(map.dims[0]) * map.dims[1]));
    Pose target = Pose::FromTranslation(map.center(ix, iy, iz));
    for (const auto& seed : seeds) {
      IkResult r = solve_ik(chain, target, seed, cfg.ik);
      if (r.converged && r.residual.trans_err < cfg.ik.pos_tol) {
        map.reachable[idx] = 1;
        return;
      }
    }
  };

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < total; ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) evaluate(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  map.count = 0;
  for (auto v : map.reachable) map.count += v;
  map.volume = static_cast<double>(map.count) * resolution * resolution * resolution;
  return map;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string workspace_to_text(const WorkspaceMap& map) {
  std::ostringstream os;
  os << "# reach workspace map v1\n";
  os << "bounds = [" << num(map.bounds.lo.x()) << ", " << num(map.bounds.lo.y()) << ", "
     << num(map.bounds.lo.z()) << ", " << num(map.bounds.hi.x()) << ", "
     << num(map.bounds.hi.y()) << ", " << num(map.bounds.hi.z()) << "]\n";
  os << "resolution = " << num(map.resolution) << "\n";
  os << "dims = [" << map.dims[0] << ", " << map.dims[1] << ", " << map.dims[2] << "]\n";
  os << "count = " << map.count << "\n";
  os << "volume_m3 = " << num(map.volume) << "\n";
  // Runs alternate starting with unreachable; the first run may be empty.
  os << "rle =";
  std::uint8_t current = 0;
  std::size_t run = 0;
  for (auto v : map.reachable) {
    if (v == current) {
      ++run;
    } else {
      os << ' ' << run;
      current = v;
      run = 1;
    }
  }
  os << ' ' << run << "\n";
  return os.str();
}

WorkspaceMap workspace_from_text(const std::string& text) {
  WorkspaceMap map;
  std::istringstream is(text);
  std::string line;
  bool have_rle = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("workspace map: malformed line");
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(' ') + 1);
    std::string val = line.substr(eq + 1);
    for (char& c : val) {
      if (c == '[' || c == ']' || c == ',') c = ' ';
    }
    std::istringstream vs(val);
    if (key == "bounds") {
      vs >> map.bounds.lo.x() >> map.bounds.lo.y() >> map.bounds.lo.z() >>
          map.bounds.hi.x() >> map.bounds.hi.y() >> map.bounds.hi.z();
    } else if (key == "resolution") {
      vs >> map.resolution;
    } else if (key == "dims") {
      vs >> map.dims[0] >> map.dims[1] >> map.dims[2];
    } else if (key == "count") {
      vs >> map.count;
    } else if (key == "volume_m3") {
      vs >> map.volume;
    } else if (key == "rle") {
      std::uint8_t current = 0;
      std::size_t run;
      while (vs >> run) {
        map.reachable.insert(map.reachable.end(), run, current);
        current ^= 1u;
      }
      have_rle = true;
    }
  }
  std::size_t total = static_cast<std::size_t>(map.dims[0]) * map.dims[1] * map.dims[2];
  if (!have_rle || map.reachable.size() != total) {
    throw Error("workspace map: bitmap does not match dims");
  }
  return map;
}

std::string workspace_csv_row(const std::string& config_name, const WorkspaceMap& map) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s,%lld,%.9f", config_name.c_str(),
                static_cast<long long>(map.count), map.volume);
  return buf;
}

}  // namespace reach
