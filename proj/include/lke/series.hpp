#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lke {

// Columnar time series: cols[j][i] is observable names[j] sampled at t[i].
struct TimeSeries {
    std::vector<double> t;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;

    int col(const std::string& name) const {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return static_cast<int>(j);
        return -1;
    }
    const std::vector<double>& column(const std::string& name) const {
        int j = col(name);
        if (j < 0) throw std::invalid_argument("TimeSeries: no column named " + name);
        return cols[static_cast<std::size_t>(j)];
    }
};

}  // namespace lke
