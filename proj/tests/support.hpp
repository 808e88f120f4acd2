// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/ltc.hpp"

#include <filesystem>
#include <string>

namespace glintlab::testing {

/// Coarse GGX table shared by the unit tests; baked once per process.
inline const LtcTable& small_table()
{
    static const LtcTable t = bake_table(NdfKind::GGX, 8);
    return t;
}

inline std::filesystem::path temp_file(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("glintlab_test_" + name);
}

} // namespace glintlab::testing
