#include "growth/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "growth/errors.hpp"

namespace growth {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_num(const std::string& s, const std::string& context) {
    const std::string t = trim(s);
    if (t.empty()) throw DataError("empty numeric field in " + context);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (errno != 0 || end != t.c_str() + t.size())
        throw DataError("bad numeric field '" + t + "' in " + context);
    return v;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string line;
    std::istringstream is(text);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) out.push_back(line);
    }
    return out;
}

void check_uniform(const std::vector<double>& times, const std::string& context) {
    if (times.size() < 2) return;
    const double h = times[1] - times[0];
    if (!(h > 0)) throw DataError("time stamps must increase in " + context);
    for (size_t i = 1; i < times.size(); ++i) {
        const double d = times[i] - times[i - 1];
        if (std::abs(d - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw DataError("non-uniform time spacing in " + context);
    }
}

TimeGrid grid_from_times(const std::vector<double>& times, const std::string& context) {
    check_uniform(times, context);
    TimeGrid grid;
    grid.t0 = times.front();
    grid.h = times.size() > 1 ? times[1] - times[0] : 1.0;
    grid.q = static_cast<int>(times.size());
    return grid;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    if (std::strtod(buf, nullptr) != v)
        std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp + " for writing");
        out << content;
        out.flush();
        if (!out) throw DataError("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw DataError("cannot rename " + tmp + " to " + path);
    }
}

TrajectoryMatrix read_wide_csv(const std::string& path) {
    const auto lines = lines_of(read_file(path));
    if (lines.size() < 2) throw DataError("wide csv needs a header and a row: " + path);
    const auto header = split_line(lines[0]);
    if (header.size() < 3 || trim(header[0]) != "id")
        throw DataError("wide csv header must be id,t...,t...: " + path);
    std::vector<double> times;
    for (size_t c = 1; c < header.size(); ++c)
        times.push_back(parse_num(header[c], "header of " + path));

    TrajectoryMatrix data;
    data.grid = grid_from_times(times, path);
    data.x.resize(static_cast<long>(lines.size() - 1), static_cast<long>(times.size()));
    for (size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_line(lines[r]);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(r) + " has " +
                            std::to_string(cells.size()) + " fields, expected " +
                            std::to_string(header.size()) + " in " + path);
        data.ids.push_back(trim(cells[0]));
        for (size_t c = 1; c < cells.size(); ++c)
            data.x(static_cast<long>(r - 1), static_cast<long>(c - 1)) =
                parse_num(cells[c], "row " + std::to_string(r) + " of " + path);
    }
    data.validate();
    return data;
}

std::string wide_csv(const TrajectoryMatrix& data) {
    data.validate();
    std::ostringstream os;
    os << "id";
    for (int j = 0; j < data.grid.q; ++j) os << ',' << format_double(data.grid.t(j));
    os << '\n';
    for (long i = 0; i < data.x.rows(); ++i) {
        os << (i < static_cast<long>(data.ids.size()) ? data.ids[static_cast<size_t>(i)]
                                                      : std::to_string(i + 1));
        for (long j = 0; j < data.x.cols(); ++j) os << ',' << format_double(data.x(i, j));
        os << '\n';
    }
    return os.str();
}

TrajectoryMatrix read_long_csv(const std::string& path) {
    const auto lines = lines_of(read_file(path));
    if (lines.size() < 2) throw DataError("long csv needs a header and a row: " + path);
    const auto header = split_line(lines[0]);
    if (header.size() != 3 || trim(header[0]) != "id" || trim(header[1]) != "t" ||
        trim(header[2]) != "x")
        throw DataError("long csv header must be id,t,x: " + path);

    // Preserve first-appearance order of ids; times must repeat identically.
    std::vector<std::string> ids;
    std::vector<std::vector<double>> times, values;
    for (size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_line(lines[r]);
        if (cells.size() != 3)
            throw DataError("row " + std::to_string(r) + " needs 3 fields in " + path);
        const std::string id = trim(cells[0]);
        const double t = parse_num(cells[1], "row " + std::to_string(r) + " of " + path);
        const double x = parse_num(cells[2], "row " + std::to_string(r) + " of " + path);
        size_t k = 0;
        for (; k < ids.size(); ++k)
            if (ids[k] == id) break;
        if (k == ids.size()) {
            ids.push_back(id);
            times.emplace_back();
            values.emplace_back();
        }
        times[k].push_back(t);
        values[k].push_back(x);
    }
    for (size_t k = 1; k < ids.size(); ++k)
        if (times[k] != times[0])
            throw DataError("trajectory '" + ids[k] + "' has a different time grid in " +
                            path);

    TrajectoryMatrix data;
    data.grid = grid_from_times(times[0], path);
    data.ids = ids;
    data.x.resize(static_cast<long>(ids.size()), static_cast<long>(times[0].size()));
    for (size_t k = 0; k < ids.size(); ++k)
        for (size_t j = 0; j < values[k].size(); ++j)
            data.x(static_cast<long>(k), static_cast<long>(j)) = values[k][j];
    data.validate();
    return data;
}

std::string long_csv(const TrajectoryMatrix& data) {
    data.validate();
    std::ostringstream os;
    os << "id,t,x\n";
    for (long i = 0; i < data.x.rows(); ++i) {
        const std::string id = i < static_cast<long>(data.ids.size())
                                   ? data.ids[static_cast<size_t>(i)]
                                   : std::to_string(i + 1);
        for (int j = 0; j < data.grid.q; ++j)
            os << id << ',' << format_double(data.grid.t(j)) << ','
               << format_double(data.x(i, j)) << '\n';
    }
    return os.str();
}

std::vector<std::pair<double, double>> read_series_csv(const std::string& path) {
    const auto lines = lines_of(read_file(path));
    if (lines.size() < 2) throw DataError("series csv needs a header and a row: " + path);
    const auto header = split_line(lines[0]);
    if (header.size() != 2 || trim(header[0]) != "t" || trim(header[1]) != "x")
        throw DataError("series csv header must be t,x: " + path);
    std::vector<std::pair<double, double>> out;
    for (size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_line(lines[r]);
        if (cells.size() != 2)
            throw DataError("row " + std::to_string(r) + " needs 2 fields in " + path);
        out.emplace_back(parse_num(cells[0], "row " + std::to_string(r) + " of " + path),
                         parse_num(cells[1], "row " + std::to_string(r) + " of " + path));
    }
    return out;
}

std::string series_csv(const std::vector<std::pair<double, double>>& series) {
    std::ostringstream os;
    os << "t,x\n";
    for (const auto& [t, x] : series)
        os << format_double(t) << ',' << format_double(x) << '\n';
    return os.str();
}

TrajectoryMatrix series_to_matrix(const std::vector<std::pair<double, double>>& series) {
    if (series.empty()) throw DataError("empty series");
    std::vector<double> times;
    times.reserve(series.size());
    for (const auto& [t, x] : series) times.push_back(t);
    TrajectoryMatrix data;
    data.grid = grid_from_times(times, "series");
    data.ids = {"series"};
    data.x.resize(1, static_cast<long>(series.size()));
    for (size_t j = 0; j < series.size(); ++j)
        data.x(0, static_cast<long>(j)) = series[j].second;
    data.validate();
    return data;
}

std::vector<std::pair<double, double>> load_owid_csv(const std::string& path,
                                                     const std::string& location,
                                                     const std::string& start_date,
                                                     int n_days) {
    if (n_days < 1) throw DataError("n_days must be >= 1");
    const auto lines = lines_of(read_file(path));
    if (lines.size() < 2) throw DataError("csv needs a header and a row: " + path);
    const auto header = split_line(lines[0]);
    long loc_col = -1, date_col = -1, cases_col = -1;
    for (size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (name == "location") loc_col = static_cast<long>(c);
        if (name == "date") date_col = static_cast<long>(c);
        if (name == "total_cases") cases_col = static_cast<long>(c);
    }
    if (loc_col < 0 || date_col < 0 || cases_col < 0)
        throw DataError("csv must have location,date,total_cases columns: " + path);

    // Collect the location's rows in file order (the file is date-sorted per
    // location), then cut the window starting at start_date.
    std::vector<std::pair<std::string, double>> rows;
    for (size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_line(lines[r]);
        if (static_cast<long>(cells.size()) <=
            std::max(loc_col, std::max(date_col, cases_col)))
            continue;
        if (trim(cells[static_cast<size_t>(loc_col)]) != location) continue;
        const std::string cases = trim(cells[static_cast<size_t>(cases_col)]);
        if (cases.empty()) continue;
        rows.emplace_back(trim(cells[static_cast<size_t>(date_col)]),
                          parse_num(cases, "row " + std::to_string(r) + " of " + path));
    }
    if (rows.empty()) throw DataError("no rows for location '" + location + "'");

    size_t start = 0;
    while (start < rows.size() && rows[start].first < start_date) ++start;
    if (start == rows.size())
        throw DataError("no rows at or after " + start_date + " for '" + location + "'");
    if (rows.size() - start < static_cast<size_t>(n_days))
        throw DataError("only " + std::to_string(rows.size() - start) + " rows from " +
                        start_date + ", need " + std::to_string(n_days));

    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<size_t>(n_days));
    for (int d = 0; d < n_days; ++d)
        out.emplace_back(static_cast<double>(d + 1), rows[start + static_cast<size_t>(d)].second);
    return out;
}

} // namespace growth
