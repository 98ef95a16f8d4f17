#pragma once

#include <string>
#include <utility>
#include <vector>

#include "growth/data.hpp"

namespace growth {

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

// Whole-file helpers.  write_file is atomic: temp file + rename, so a failed
// run leaves no partial output.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Wide layout: header "id,t0,...,t_{q-1}" with numeric time labels; one row
// per trajectory.  Times must be uniformly spaced (1e-9 relative).
TrajectoryMatrix read_wide_csv(const std::string& path);
std::string wide_csv(const TrajectoryMatrix& data);

// Long layout: columns (id, t, x).
TrajectoryMatrix read_long_csv(const std::string& path);
std::string long_csv(const TrajectoryMatrix& data);

// Series layout: columns (t, x), single trajectory.
std::vector<std::pair<double, double>> read_series_csv(const std::string& path);
std::string series_csv(const std::vector<std::pair<double, double>>& series);

// Wrap a single series as a 1-row trajectory panel (validates uniform grid).
TrajectoryMatrix series_to_matrix(const std::vector<std::pair<double, double>>& series);

// Extract (day index, cumulative count) for one location from a CSV with
// columns including location, date, total_cases (ourworldindata convention).
std::vector<std::pair<double, double>> load_owid_csv(const std::string& path,
                                                     const std::string& location,
                                                     const std::string& start_date,
                                                     int n_days);

} // namespace growth
