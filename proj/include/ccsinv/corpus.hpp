#pragma once

#include <span>
#include <string_view>

namespace ccsinv {

/// Bundled `.ctrs` examples (rem, add, ack and Romanenko's ack_2/ack_1).
struct Example {
    std::string_view name;
    std::string_view text;
};

std::span<const Example> examples();
const Example* find_example(std::string_view name);

}  // namespace ccsinv
