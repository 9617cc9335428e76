/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include "meshflow/core/message.hpp"

namespace meshflow {

std::string_view to_string(MessageKind kind) noexcept {
    switch (kind) {
        case MessageKind::kData:
            return "DATA";
        case MessageKind::kWindowMarker:
            return "WINDOW_MARKER";
        case MessageKind::kTerminate:
            return "TERMINATE";
    }
    return "UNKNOWN";
}

}  // namespace meshflow
