#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace adacache {

/*================================ Codebook ================================*/

// Ordered (threshold -> cache-rate) pairs. A metric value selects the rate
// of the first entry whose threshold exceeds it; the final entry is the
// catch-all for anything larger. Higher change must map to lower rates, so
// rates are non-increasing down the list.
struct Codebook {
    struct Entry {
        double threshold = 0.0;
        int rate         = 1;
        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> entries;

    void validate() const {
        if (entries.empty()) throw config_error("codebook: must have at least one entry");
        for (size_t i = 0; i < entries.size(); ++i) {
            const Entry& e = entries[i];
            if (std::isnan(e.threshold)) throw config_error("codebook: threshold is NaN");
            if (e.rate < 1) throw config_error("codebook: rates must be >= 1");
            if (i > 0) {
                if (!(entries[i - 1].threshold < e.threshold)) {
                    throw config_error("codebook: thresholds must be strictly increasing");
                }
                if (e.rate > entries[i - 1].rate) {
                    throw config_error("codebook: rates must be non-increasing");
                }
            }
        }
    }

    // The catch-all entry carries the smallest rate (rates are
    // non-increasing); used as the bootstrap rate before any metric exists.
    int min_rate() const {
        if (entries.empty()) throw config_error("codebook: must have at least one entry");
        return entries.back().rate;
    }

    bool operator==(const Codebook&) const = default;
};

// Rate of the first entry whose threshold exceeds c; catch-all otherwise.
inline int lookup_rate(const Codebook& cb, double c) {
    if (cb.entries.empty()) throw config_error("codebook: must have at least one entry");
    if (std::isnan(c) || c < 0.0) {
        throw std::invalid_argument("lookup_rate: metric must be non-negative");
    }
    for (const auto& e : cb.entries) {
        if (c < e.threshold) return e.rate;
    }
    return cb.entries.back().rate;
}

/*================================ presets =================================*/

inline const std::vector<std::pair<std::string, Codebook>>& codebook_presets() {
    static const std::vector<std::pair<std::string, Codebook>> presets = {
        {"fast30",
         Codebook{{{0.08, 6}, {0.16, 5}, {0.24, 4}, {0.32, 3}, {0.40, 2}, {1.00, 1}}}},
        {"fast100",
         Codebook{{{0.03, 12}, {0.05, 10}, {0.07, 8}, {0.09, 6}, {0.11, 4}, {1.00, 3}}}},
        {"slow30",
         Codebook{{{0.08, 3}, {0.16, 2}, {0.24, 1}, {1.00, 1}}}},
        {"all-compute",
         Codebook{{{std::numeric_limits<double>::infinity(), 1}}}},
    };
    return presets;
}

inline const Codebook* codebook_preset(const std::string& name) {
    for (const auto& [n, cb] : codebook_presets()) {
        if (n == name) return &cb;
    }
    return nullptr;
}

/*================================ parsing =================================*/

// Inline syntax: comma-separated "threshold:rate" pairs, e.g.
// "0.08:6,0.16:5,1.00:1". "inf" is accepted as a threshold.
inline Codebook parse_codebook(const std::string& text) {
    Codebook cb;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const size_t colon = item.find(':');
        if (colon == std::string::npos) {
            throw config_error("codebook: expected threshold:rate, got '" + item + "'");
        }
        std::string thr_s  = item.substr(0, colon);
        std::string rate_s = item.substr(colon + 1);
        auto strip = [](std::string& s) {
            const size_t b = s.find_first_not_of(" \t");
            const size_t e = s.find_last_not_of(" \t");
            s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
        };
        strip(thr_s);
        strip(rate_s);

        Codebook::Entry e;
        if (thr_s == "inf" || thr_s == "INF" || thr_s == "Inf") {
            e.threshold = std::numeric_limits<double>::infinity();
        } else {
            size_t pos = 0;
            try {
                e.threshold = std::stod(thr_s, &pos);
            } catch (const std::exception&) {
                throw config_error("codebook: bad threshold '" + thr_s + "'");
            }
            if (pos != thr_s.size()) throw config_error("codebook: bad threshold '" + thr_s + "'");
        }
        size_t pos = 0;
        try {
            e.rate = std::stoi(rate_s, &pos);
        } catch (const std::exception&) {
            throw config_error("codebook: bad rate '" + rate_s + "'");
        }
        if (pos != rate_s.size()) throw config_error("codebook: bad rate '" + rate_s + "'");
        cb.entries.push_back(e);
    }
    cb.validate();
    return cb;
}

// Accepts a preset name or an inline threshold:rate list.
inline Codebook resolve_codebook(const std::string& choice) {
    if (const Codebook* p = codebook_preset(choice)) return *p;
    if (choice.find(':') == std::string::npos) {
        std::string names;
        for (const auto& [n, cb] : codebook_presets()) {
            if (!names.empty()) names += ", ";
            names += n;
        }
        throw config_error("codebook: unknown preset '" + choice + "' (have: " + names + ")");
    }
    return parse_codebook(choice);
}

inline std::string codebook_to_string(const Codebook& cb) {
    std::string out;
    for (size_t i = 0; i < cb.entries.size(); ++i) {
        if (i) out += ",";
        const double t = cb.entries[i].threshold;
        if (std::isinf(t)) {
            out += "inf";
        } else {
            std::ostringstream os;
            os << t;
            out += os.str();
        }
        out += ":" + std::to_string(cb.entries[i].rate);
    }
    return out;
}

}  // namespace adacache
