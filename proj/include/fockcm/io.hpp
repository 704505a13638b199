#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fockcm/semiclassics.hpp"

namespace fockcm {

/// Shortest text that reads back to the same double ("%.17g"), so reruns are byte-identical.
std::string fmt(double v);

/// One CSV cell: numbers are formatted on construction.
struct Cell {
    std::string text;
    Cell(const char* s) : text(s) {}
    Cell(std::string s) : text(std::move(s)) {}
    Cell(double v) : text(fmt(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(long v) : text(std::to_string(v)) {}
    Cell(long long v) : text(std::to_string(v)) {}
    Cell(unsigned long v) : text(std::to_string(v)) {}
    Cell(unsigned long long v) : text(std::to_string(v)) {}
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<Cell> cells);
    std::size_t size() const { return rows.size(); }
    /// Column index by name; throws std::out_of_range.
    std::size_t col(const std::string& name) const;
    /// Column parsed as doubles.
    RVec numbers(const std::string& name) const;
};

/// Header line "# config_hash=<hash>" when hash is non-empty, then the column row and data rows.
void write_csv(std::ostream& os, const CsvTable& t, const std::string& hash = "");
void write_csv(const std::string& path, const CsvTable& t, const std::string& hash = "");
/// Inverse of write_csv; comment lines are skipped and the hash returned through `hash`.
CsvTable read_csv(std::istream& is, std::string* hash = nullptr);
CsvTable read_csv(const std::string& path, std::string* hash = nullptr);

/// Key-value text, one "key = value" per line, in insertion order.
using Manifest = std::vector<std::pair<std::string, std::string>>;
void write_manifest(const std::string& path, const Manifest& m);

struct Series {
    std::string name;
    RVec x;
    RVec y;
};

struct PlotAxes {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;
};

/// Minimal SVG line chart, one polyline per series. Non-positive values are skipped on log axes.
void svg_lines(std::ostream& os, const std::vector<Series>& series, const PlotAxes& axes);
/// Heatmap of values[row * nx + col] on a grey-to-blue ramp; row 0 at the bottom.
void svg_heatmap(std::ostream& os, const RVec& values, std::size_t nx, std::size_t ny, const PlotAxes& axes,
                 std::pair<double, double> xrange, std::pair<double, double> yrange);

/// Columns x_1..x_d, xi_1..xi_d, value.
CsvTable husimi_table(const HusimiField& f);
/// "HUSI", u32 version, u32 d, u32 M, f64 delta, f64 h, u32 coarsen, then the values as
/// little-endian float64 in HusimiField order.
void write_husimi_raster(std::ostream& os, const HusimiField& f);
HusimiField read_husimi_raster(std::istream& is);

/// Creates the directory and its parents.
void ensure_dir(const std::string& path);

}  // namespace fockcm
