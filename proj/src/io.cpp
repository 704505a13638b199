#include "fockcm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fockcm {

namespace {

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("read_husimi_raster: truncated stream");
    return v;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    return os;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string short_num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

void frame(std::ostream& os, const PlotAxes& axes, double x0, double x1, double y0, double y1) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(axes.title)
       << "</text>\n"
       << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
       << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto lab = [&](double v, bool log) { return short_num(log ? std::pow(10.0, v) : v); };
    os << "<text x=\"" << kLeft << "\" y=\"" << kHeight - kBottom + 16 << "\">" << lab(x0, axes.logx) << "</text>\n"
       << "<text x=\"" << kWidth - kRight << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"end\">"
       << lab(x1, axes.logx) << "</text>\n"
       << "<text x=\"" << kLeft - 4 << "\" y=\"" << kHeight - kBottom << "\" text-anchor=\"end\">" << lab(y0, axes.logy)
       << "</text>\n"
       << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">" << lab(y1, axes.logy)
       << "</text>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
       << xml_escape(axes.xlabel) << (axes.logx ? " (log)" : "") << "</text>\n"
       << "<text transform=\"translate(16," << kHeight / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << xml_escape(axes.ylabel) << (axes.logy ? " (log)" : "") << "</text>\n";
}

}  // namespace

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void CsvTable::add(std::vector<Cell> cells) {
    if (cells.size() != columns.size()) throw std::invalid_argument("CsvTable::add: row width mismatch");
    std::vector<std::string> row;
    row.reserve(cells.size());
    for (auto& c : cells) row.push_back(std::move(c.text));
    rows.push_back(std::move(row));
}

std::size_t CsvTable::col(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::out_of_range("CsvTable: no column '" + name + "'");
}

RVec CsvTable::numbers(const std::string& name) const {
    const std::size_t c = col(name);
    RVec out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::stod(r[c]));
    return out;
}

void write_csv(std::ostream& os, const CsvTable& t, const std::string& hash) {
    if (!hash.empty()) os << "# config_hash=" << hash << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << quote(t.columns[i]);
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << quote(r[i]);
        os << "\n";
    }
}

void write_csv(const std::string& path, const CsvTable& t, const std::string& hash) {
    auto os = open_out(path);
    write_csv(os, t, hash);
}

CsvTable read_csv(std::istream& is, std::string* hash) {
    CsvTable t;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string key = "# config_hash=";
            if (hash && line.rfind(key, 0) == 0) *hash = line.substr(key.size());
            continue;
        }
        auto cells = split_row(line);
        if (header) {
            t.columns = std::move(cells);
            header = false;
        } else {
            if (cells.size() != t.columns.size()) throw std::runtime_error("read_csv: ragged row");
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

CsvTable read_csv(const std::string& path, std::string* hash) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read '" + path + "'");
    return read_csv(is, hash);
}

void write_manifest(const std::string& path, const Manifest& m) {
    auto os = open_out(path);
    for (const auto& [k, v] : m) os << k << " = " << v << "\n";
}

void svg_lines(std::ostream& os, const std::vector<Series>& series, const PlotAxes& axes) {
    auto tx = [&](double v) { return axes.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return axes.logy ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!axes.logx || x > 0) && (!axes.logy || y > 0);
    };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (x0 > x1) x0 = 0, x1 = 1;
    if (y0 > y1) y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    frame(os, axes, x0, x1, y0, y1);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = kPalette[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            os << short_num(kLeft + pw * (tx(s.x[i]) - x0) / (x1 - x0)) << ","
               << short_num(kTop + ph * (1 - (ty(s.y[i]) - y0) / (y1 - y0))) << " ";
        }
        os << "\"/>\n"
           << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 16 + 14 * k << "\" fill=\"" << colour << "\">"
           << xml_escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
}

void svg_heatmap(std::ostream& os, const RVec& values, std::size_t nx, std::size_t ny, const PlotAxes& axes,
                 std::pair<double, double> xrange, std::pair<double, double> yrange) {
    if (values.size() != nx * ny || nx == 0 || ny == 0) throw std::invalid_argument("svg_heatmap: size mismatch");
    PlotAxes plain = axes;
    plain.logx = plain.logy = false;
    frame(os, plain, xrange.first, xrange.second, yrange.first, yrange.second);
    const double vmax = std::max(*std::max_element(values.begin(), values.end()), 1e-300);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const double cw = pw / nx, ch = ph / ny;
    for (std::size_t r = 0; r < ny; ++r)
        for (std::size_t c = 0; c < nx; ++c) {
            const double s = std::clamp(values[r * nx + c] / vmax, 0.0, 1.0);
            const int red = static_cast<int>(std::lround(240 * (1 - s))), green = static_cast<int>(std::lround(240 - 150 * s)),
                      blue = static_cast<int>(std::lround(240 - 60 * s));
            os << "<rect x=\"" << short_num(kLeft + c * cw) << "\" y=\"" << short_num(kTop + ph - (r + 1) * ch)
               << "\" width=\"" << short_num(cw + 0.05) << "\" height=\"" << short_num(ch + 0.05) << "\" fill=\"rgb("
               << red << "," << green << "," << blue << ")\"/>\n";
        }
    os << "</svg>\n";
}

CsvTable husimi_table(const HusimiField& f) {
    CsvTable t;
    const int d = f.grid.d;
    for (int a = 0; a < d; ++a) t.columns.push_back("x_" + std::to_string(a + 1));
    for (int a = 0; a < d; ++a) t.columns.push_back("xi_" + std::to_string(a + 1));
    t.columns.push_back("value");
    const std::size_t P = f.grid.points();
    std::vector<int> kidx(static_cast<std::size_t>(d));
    for (std::size_t j = 0; j < f.x_nodes(); ++j)
        for (std::size_t k = 0; k < P; ++k) {
            std::vector<Cell> row;
            for (int a = 0; a < d; ++a) row.emplace_back(f.x_at(j, a));
            unflatten(k, f.grid, kidx.data());
            for (int a = 0; a < d; ++a) row.emplace_back(f.xi_at(static_cast<std::size_t>(kidx[a]), a));
            row.emplace_back(f.values[j * P + k]);
            t.add(std::move(row));
        }
    return t;
}

void write_husimi_raster(std::ostream& os, const HusimiField& f) {
    os.write("HUSI", 4);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.d));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.M));
    put<double>(os, f.grid.delta);
    put<double>(os, f.h);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.coarsen));
    for (double v : f.values) put<double>(os, v);
}

HusimiField read_husimi_raster(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "HUSI", 4) != 0) throw std::runtime_error("read_husimi_raster: bad magic");
    if (get<std::uint32_t>(is) != 1) throw std::runtime_error("read_husimi_raster: unsupported version");
    HusimiField f;
    f.grid.d = static_cast<int>(get<std::uint32_t>(is));
    f.grid.M = static_cast<int>(get<std::uint32_t>(is));
    f.grid.delta = get<double>(is);
    f.grid.validate();
    f.h = get<double>(is);
    f.coarsen = static_cast<int>(get<std::uint32_t>(is));
    if (f.coarsen < 1 || f.grid.M % f.coarsen != 0) throw std::runtime_error("read_husimi_raster: bad coarsening");
    f.values.resize(f.x_nodes() * f.grid.points());
    for (auto& v : f.values) v = get<double>(is);
    return f;
}

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

}  // namespace fockcm
