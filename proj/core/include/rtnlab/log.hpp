// rtnlab/log.hpp

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

#ifndef RTNLAB_LOG_HPP_
#define RTNLAB_LOG_HPP_

#include <string>

namespace rtnlab {

// Diagnostic notes go to stderr so stdout tables and file artifacts stay
// machine-clean; silenceable for quiet test runs.
void log_note(const std::string& message);
void set_log_enabled(bool enabled);

}  // namespace rtnlab

#endif  // RTNLAB_LOG_HPP_
