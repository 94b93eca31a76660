#pragma once

#include <sstream>
#include <string>

namespace adacache::detail {

// Shortest decimal text that parses back to exactly the same double; keeps
// serialized configs and CSV artifacts byte-stable and round-trippable.
inline std::string double_to_string(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        std::ostringstream os;
        os.precision(prec);
        os << v;
        if (std::stod(os.str()) == v) return os.str();
    }
    return std::to_string(v);
}

}  // namespace adacache::detail
