// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "safehaul/types.hpp"

#include <fmt/format.h>

namespace safehaul {

std::string to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::transmit: return "transmit";
        case ActionKind::receive: return "receive";
        case ActionKind::idle: return "idle";
    }
    return "unknown";
}

std::string to_string(const Action& action) {
    return fmt::format("{}({},{})", to_string(action.kind), index(action.from), index(action.to));
}

}  // namespace safehaul
