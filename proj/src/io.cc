#include "fieldscan/io.hh"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fieldscan/errors.hh"

namespace fieldscan {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& s, const std::string& where) {
    const std::string t = trim(s);
    if (!t.empty()) {
        const char* begin = t.c_str();
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin + t.size() && std::isfinite(v)) return v;
    }
    throw ParseError(where + ": cannot parse '" + s + "' as a finite real");
}

long parse_long(const std::string& s, const std::string& where) {
    const std::string t = trim(s);
    if (!t.empty()) {
        const char* begin = t.c_str();
        char* end = nullptr;
        long v = std::strtol(begin, &end, 10);
        if (end == begin + t.size()) return v;
    }
    throw ParseError(where + ": cannot parse '" + s + "' as an integer");
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

// Splits on commas at parenthesis depth zero, so compound entries such as
// sma(1,0.2) survive as single tokens.
std::vector<std::string> split_top_level(const std::string& s,
                                         const std::string& where) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '(') {
            ++depth;
            cur.push_back(ch);
        } else if (ch == ')') {
            if (--depth < 0)
                throw ConfigError(where + ": unbalanced ')' in '" + s + "'");
            cur.push_back(ch);
        } else if (ch == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (depth != 0)
        throw ConfigError(where + ": unbalanced '(' in '" + s + "'");
    out.push_back(trim(cur));
    std::vector<std::string> nonempty;
    for (auto& t : out)
        if (!t.empty()) nonempty.push_back(std::move(t));
    return nonempty;
}

// name(arg1,arg2,...) -> (name, args); bare names yield no args.
std::pair<std::string, std::vector<std::string>> parse_call(
    const std::string& s, const std::string& where) {
    std::size_t open = s.find('(');
    if (open == std::string::npos) return {trim(s), {}};
    if (s.back() != ')')
        throw ConfigError(where + ": expected ')' at end of '" + s + "'");
    std::string name = trim(s.substr(0, open));
    std::string args = s.substr(open + 1, s.size() - open - 2);
    return {name, split_top_level(args, where)};
}

bool parse_bool(const std::string& s, const std::string& where) {
    std::string t = trim(s);
    for (char& ch : t) ch = static_cast<char>(std::tolower(
        static_cast<unsigned char>(ch)));
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError(where + ": cannot parse '" + s + "' as a boolean");
}

}  // namespace

Grid parse_grid(const std::string& text, char delimiter, bool header) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    long lineno = 0;
    bool skipped_header = !header;
    std::size_t width = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<std::string> fields = split_fields(line, delimiter);
        if (rows.empty()) {
            width = fields.size();
        } else if (fields.size() != width) {
            throw ParseError("row " + std::to_string(lineno) + " has " +
                             std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(width));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row.push_back(parse_double(
                fields[c], "row " + std::to_string(lineno) + ", column " +
                               std::to_string(c + 1)));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("grid file contains no data rows");
    Grid g(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
    return g;
}

Grid read_grid(const GridFile& file) {
    return parse_grid(read_text_file(file.path), file.delimiter, file.header);
}

std::string format_grid(const Grid& grid, char delimiter) {
    std::ostringstream os;
    char buf[64];
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        for (Eigen::Index j = 0; j < grid.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", grid(i, j));
            if (j) os << delimiter;
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

void write_grid(const Grid& grid, const GridFile& file) {
    write_text_file(file.path, format_grid(grid, file.delimiter));
}

NdviResult ndvi(const Grid& red, const Grid& nir) {
    if (red.rows() != nir.rows() || red.cols() != nir.cols())
        throw DimensionMismatch("ndvi: band dimensions differ (" +
                                std::to_string(red.rows()) + "x" +
                                std::to_string(red.cols()) + " vs " +
                                std::to_string(nir.rows()) + "x" +
                                std::to_string(nir.cols()) + ")");
    require_finite(red, "red band");
    require_finite(nir, "nir band");
    if ((red.array() < 0.0).any() || (nir.array() < 0.0).any())
        throw InputError("ndvi: bands must be nonnegative");
    NdviResult out;
    out.grid = Grid(red.rows(), red.cols());
    for (Eigen::Index j = 0; j < red.cols(); ++j)
        for (Eigen::Index i = 0; i < red.rows(); ++i) {
            double denom = nir(i, j) + red(i, j);
            if (denom == 0.0) {
                out.grid(i, j) = 0.0;
                ++out.flagged;
            } else {
                out.grid(i, j) = (nir(i, j) - red(i, j)) / denom;
            }
        }
    return out;
}

std::vector<Grid> split_grid(const Grid& grid, int rows, int cols) {
    if (rows < 1 || cols < 1)
        throw InputError("split_grid: tile counts must be positive");
    if (grid.rows() % rows != 0)
        throw NotDivisible("split_grid: " + std::to_string(rows) +
                           " does not divide " + std::to_string(grid.rows()) +
                           " rows");
    if (grid.cols() % cols != 0)
        throw NotDivisible("split_grid: " + std::to_string(cols) +
                           " does not divide " + std::to_string(grid.cols()) +
                           " columns");
    Eigen::Index tn = grid.rows() / rows;
    Eigen::Index tm = grid.cols() / cols;
    std::vector<Grid> tiles;
    tiles.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            tiles.push_back(grid.block(r * tn, c * tm, tn, tm));
    return tiles;
}

Grid merge_tiles(const std::vector<Grid>& tiles, int rows, int cols) {
    if (rows < 1 || cols < 1)
        throw InputError("merge_tiles: tile counts must be positive");
    if (tiles.size() != static_cast<std::size_t>(rows) * cols)
        throw DimensionMismatch("merge_tiles: expected " +
                                std::to_string(rows * cols) + " tiles, got " +
                                std::to_string(tiles.size()));
    Eigen::Index tn = tiles.front().rows();
    Eigen::Index tm = tiles.front().cols();
    for (const Grid& t : tiles)
        if (t.rows() != tn || t.cols() != tm)
            throw DimensionMismatch("merge_tiles: tiles have mixed sizes");
    Grid g(tn * rows, tm * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            g.block(r * tn, c * tm, tn, tm) =
                tiles[static_cast<std::size_t>(r) * cols + c];
    return g;
}

DependenceSpec parse_dependence_spec(const std::string& text) {
    auto [name, args] = parse_call(trim(text), "dep");
    DependenceSpec dep;
    if (name == "iid") {
        if (!args.empty()) throw ConfigError("dep: iid takes no arguments");
        return dep;
    }
    if (name == "sma")
        dep.kind = DepKind::SMA;
    else if (name == "sar")
        dep.kind = DepKind::SARApprox;
    else
        throw UnknownKind("dep: unknown dependence kind '" + name + "'");
    if (args.size() != 2)
        throw ConfigError("dep: " + name + " needs (q, rho), got '" + text +
                          "'");
    dep.q = static_cast<int>(parse_long(args[0], "dep q"));
    dep.rho = parse_double(args[1], "dep rho");
    return dep;
}

ParsedExperiment parse_experiment_config(const std::string& text) {
    ParsedExperiment out;
    ExperimentConfig& cfg = out.config;
    cfg.tests.clear();
    cfg.noise.clear();
    cfg.dep.clear();
    cfg.surfaces.clear();
    bool saw_tests = false, saw_noise = false, saw_dep = false,
         saw_surfaces = false;

    std::istringstream is(text);
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        const std::string where = "config key '" + key + "'";
        if (key == "n_values") {
            cfg.n_values.clear();
            for (const auto& t : split_top_level(value, where))
                cfg.n_values.push_back(
                    static_cast<int>(parse_long(t, where)));
        } else if (key == "s_target") {
            cfg.s_target = parse_double(value, where);
        } else if (key == "alpha") {
            cfg.alpha = parse_double(value, where);
        } else if (key == "reps") {
            cfg.reps = static_cast<int>(parse_long(value, where));
        } else if (key == "tests") {
            saw_tests = true;
            for (const auto& t : split_top_level(value, where))
                cfg.tests.push_back(test_from_name(t));
        } else if (key == "noise") {
            saw_noise = true;
            for (const auto& t : split_top_level(value, where))
                cfg.noise.push_back(noise_from_name(t));
        } else if (key == "dep") {
            saw_dep = true;
            for (const auto& t : split_top_level(value, where))
                cfg.dep.push_back(parse_dependence_spec(t));
        } else if (key == "surfaces") {
            saw_surfaces = true;
            for (const auto& t : split_top_level(value, where)) {
                auto [name, args] = parse_call(t, where);
                SurfaceSweep sw;
                sw.kind = surface_from_name(name);
                sw.amplitudes.clear();
                for (const auto& a : args)
                    sw.amplitudes.push_back(parse_double(a, where));
                if (sw.amplitudes.empty()) sw.amplitudes.push_back(0.0);
                cfg.surfaces.push_back(std::move(sw));
            }
        } else if (key == "decorrelate") {
            cfg.decorrelate = parse_bool(value, where);
        } else if (key == "master_seed") {
            cfg.master_seed = std::strtoull(value.c_str(), nullptr, 10);
            out.explicit_seed = true;
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(parse_long(value, where));
        } else if (key == "mode") {
            out.mode = mode_from_name(value);
        } else {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        }
    }
    if (!saw_tests) cfg.tests = {TestKind::GMD, TestKind::Var};
    if (!saw_noise) cfg.noise = {NoiseDist::StdNormal};
    if (!saw_dep) cfg.dep = {DependenceSpec{}};
    if (!saw_surfaces) cfg.surfaces = {SurfaceSweep{}};
    return out;
}

ParsedExperiment read_experiment_config(const std::string& path) {
    return parse_experiment_config(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IOError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << f.rdbuf();
    if (f.bad()) throw IOError("error while reading '" + path + "'");
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IOError("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f) throw IOError("error while writing '" + path + "'");
}

}  // namespace fieldscan
