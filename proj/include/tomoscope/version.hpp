#pragma once

namespace tomoscope {

inline constexpr const char* version_string = "1.0.0";

}
