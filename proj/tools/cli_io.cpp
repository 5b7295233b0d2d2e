#include "cli_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace matern::cli {
namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty()) throw ConfigError(where + ": not a number '" + s + "'");
    if (!std::isfinite(v)) throw ConfigError(where + ": non-finite value");
    return v;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const fs::path& path, std::initializer_list<std::string> header)
    : CsvWriter(path, std::vector<std::string>(header)) {}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& h : header) *this << h;
    end_row();
}

void CsvWriter::sep() {
    if (col_ > 0) out_ << ',';
    ++col_;
}

CsvWriter& CsvWriter::operator<<(double v) {
    sep();
    out_ << fmt(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
    sep();
    if (v.find_first_of(",\"\n") == std::string::npos) {
        out_ << v;
    } else {
        out_ << '"';
        for (char c : v) out_ << (c == '"' ? std::string("\"\"") : std::string(1, c));
        out_ << '"';
    }
    return *this;
}

void CsvWriter::end_row() {
    if (col_ != columns_) throw Error("CsvWriter: row has " + std::to_string(col_) + " cells, header has " +
                                      std::to_string(columns_));
    out_ << '\n';
    col_ = 0;
    if (!out_) throw Error("CsvWriter: write failed");
}

DataFile read_data_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file " + path.string());
    std::string line;
    if (!std::getline(in, line) || split(line).empty() || line.find_first_not_of(" \t\r") == std::string::npos)
        throw ConfigError(path.string() + ": empty file");
    const auto header = split(line);
    const int d = static_cast<int>(header.size()) - 1;
    static const char* axis[] = {"x", "y", "z"};
    if (d < 1 || d > 3 || header.back() != "value")
        throw ConfigError(path.string() + ": header must be x[,y[,z]],value");
    for (int k = 0; k < d; ++k) {
        if (header[static_cast<std::size_t>(k)] != axis[k])
            throw ConfigError(path.string() + ": header must be x[,y[,z]],value");
    }
    std::vector<double> coords, values;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (cells.size() != header.size())
            throw ConfigError(where + ": expected " + std::to_string(header.size()) + " columns");
        for (int k = 0; k < d; ++k) coords.push_back(parse_double(cells[static_cast<std::size_t>(k)], where));
        values.push_back(parse_double(cells.back(), where));
    }
    if (values.empty()) throw ConfigError(path.string() + ": no data rows");
    const auto n = static_cast<Index>(values.size());
    Eigen::MatrixXd c(n, d);
    for (Index i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) c(i, k) = coords[static_cast<std::size_t>(i * d + k)];
    try {
        return DataFile{LocationSet(d, std::move(c)), Eigen::Map<Eigen::VectorXd>(values.data(), n)};
    } catch (const DomainError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_data_csv(const fs::path& path, const LocationSet& locs, const Eigen::VectorXd& y) {
    static const char* axis[] = {"x", "y", "z"};
    std::vector<std::string> header;
    for (int k = 0; k < locs.dim(); ++k) header.emplace_back(axis[k]);
    header.emplace_back("value");
    CsvWriter w(path, header);
    for (Index i = 0; i < locs.size(); ++i) {
        for (int k = 0; k < locs.dim(); ++k) w << locs.coords()(i, k);
        w << y(i);
        w.end_row();
    }
}

json load_config(const std::optional<std::string>& path) {
    if (!path) return json::object();
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config " + *path);
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw ConfigError(*path + ": top level must be an object");
        return j;
    } catch (const json::exception& e) {
        throw ConfigError(*path + ": " + e.what());
    }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

NoisyModelParams parse_params(const json& obj, const std::string& where) {
    check_keys(obj, {"tau2", "sigma2", "phi", "range", "nu"}, where);
    if (obj.contains("phi") && obj.contains("range")) throw ConfigError(where + ": give phi or range, not both");
    NoisyModelParams p;
    p.tau2 = get_or(obj, "tau2", 0.2);
    p.matern.sigma2 = get_or(obj, "sigma2", 1.0);
    p.matern.nu = get_or(obj, "nu", 0.5);
    if (!(p.matern.nu > 0.0) || !std::isfinite(p.matern.nu)) throw ConfigError(where + ": nu must be positive");
    const double range = get_or(obj, "range", 0.4);
    if (obj.contains("phi")) {
        p.matern.phi = get_or(obj, "phi", 1.0);
    } else {
        if (!(range > 0.0)) throw ConfigError(where + ": range must be positive");
        p.matern.phi = phi_from_effective_range(range, p.matern.nu);
    }
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return p;
}

Manifest::Manifest(fs::path dir, std::string command) : dir_(std::move(dir)) {
    doc_["command"] = std::move(command);
    doc_["tool_version"] = MATERN_VERSION;
    doc_["started_utc"] = utc_now();
    doc_["stages"] = json::array();
    doc_["outputs"] = json::array();
    doc_["status"] = "running";
    flush();
}

fs::path Manifest::output(const std::string& name) {
    doc_["outputs"].push_back(name);
    flush();
    return dir_ / name;
}

void Manifest::stage(const std::string& name, double seconds) {
    doc_["stages"].push_back({{"name", name}, {"seconds", seconds}});
    flush();
}

void Manifest::finish(int exit_code, const std::string& error) {
    doc_["exit_code"] = exit_code;
    doc_["status"] = exit_code == kOk ? "ok" : "failed";
    if (!error.empty()) doc_["error"] = error;
    doc_["finished_utc"] = utc_now();
    flush();
}

void Manifest::flush() {
    std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
    out << doc_.dump(2) << '\n';
}

}  // namespace matern::cli
