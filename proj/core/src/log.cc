// core/src/log.cc

// Copyright 2026 The rtnlab Authors
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

#include "rtnlab/log.hpp"

#include <iostream>

namespace rtnlab {

namespace {
bool g_log_enabled = true;
}

void log_note(const std::string& message) {
  if (g_log_enabled) std::cerr << "note: " << message << "\n";
}

void set_log_enabled(bool enabled) { g_log_enabled = enabled; }

}  // namespace rtnlab
