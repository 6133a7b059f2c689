#include "thra/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <utility>

#include "thra/util.hpp"

namespace thra {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw Error(cat(what, " contains a non-finite value at index ", i));
    }
}

}  // namespace

WavelengthGrid::WavelengthGrid(std::vector<double> points_nm) : points_(std::move(points_nm)) {
    if (points_.empty()) throw Error("wavelength grid must not be empty");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i]) || points_[i] <= 0.0)
            throw Error(cat("wavelength grid point ", i, " is not a positive finite value"));
        if (i > 0 && points_[i] <= points_[i - 1])
            throw Error(cat("wavelength grid must be strictly increasing (", points_[i - 1],
                            " nm followed by ", points_[i], " nm at index ", i, ")"));
    }
}

WavelengthGrid WavelengthGrid::uniform(double lo_nm, double hi_nm, double step_nm) {
    if (!std::isfinite(lo_nm) || !std::isfinite(hi_nm) || !std::isfinite(step_nm))
        throw Error("uniform grid bounds must be finite");
    if (lo_nm <= 0.0) throw Error("uniform grid start must be positive");
    if (step_nm <= 0.0) throw Error("uniform grid step must be positive");
    if (hi_nm < lo_nm) throw Error(cat("uniform grid upper bound ", hi_nm, " nm below start ", lo_nm, " nm"));
    const auto n = static_cast<std::size_t>(std::floor((hi_nm - lo_nm) / step_nm + 1e-9)) + 1;
    std::vector<double> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(lo_nm + static_cast<double>(i) * step_nm);
    return WavelengthGrid(std::move(pts));
}

WavelengthGrid WavelengthGrid::analysis_default() { return uniform(1500.0, 2100.0, 1.0); }

bool WavelengthGrid::contains(double lambda_nm) const {
    return !points_.empty() && lambda_nm >= points_.front() && lambda_nm <= points_.back();
}

TransmittanceSpectrum::TransmittanceSpectrum(WavelengthGrid g, std::vector<double> v,
                                             std::optional<std::vector<double>> u)
    : grid(std::move(g)), values_db(std::move(v)), uncertainty_db(std::move(u)) {
    if (values_db.size() != grid.size())
        throw Error(cat("spectrum has ", values_db.size(), " values for ", grid.size(), " grid points"));
    check_finite(values_db, "spectrum values_db");
    if (uncertainty_db) {
        if (uncertainty_db->size() != grid.size())
            throw Error(cat("spectrum has ", uncertainty_db->size(), " uncertainties for ", grid.size(),
                            " grid points"));
        for (std::size_t i = 0; i < uncertainty_db->size(); ++i) {
            if (!std::isfinite((*uncertainty_db)[i]) || (*uncertainty_db)[i] < 0.0)
                throw Error(cat("spectrum uncertainty at index ", i, " must be finite and >= 0"));
        }
    }
}

TransmittanceSpectrum TransmittanceSpectrum::flat(const WavelengthGrid& grid, double level_db) {
    if (!std::isfinite(level_db)) throw Error("flat spectrum level must be finite");
    return TransmittanceSpectrum(grid, std::vector<double>(grid.size(), level_db));
}

RawScan::RawScan(WavelengthGrid g, std::vector<double> ref, std::vector<double> mes,
                 std::vector<double> filt)
    : grid(std::move(g)), i_ref(std::move(ref)), i_mes(std::move(mes)), t_f(std::move(filt)) {
    if (i_ref.size() != grid.size() || i_mes.size() != grid.size() || t_f.size() != grid.size())
        throw Error("raw scan columns must all match the grid length");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(i_ref[i]) || i_ref[i] <= 0.0)
            throw Error(cat("raw scan i_ref must be positive (got ", i_ref[i], " at ", grid[i], " nm)"));
        if (!std::isfinite(i_mes[i]) || i_mes[i] <= 0.0)
            throw Error(cat("raw scan i_mes must be positive (got ", i_mes[i], " at ", grid[i], " nm)"));
        if (!std::isfinite(t_f[i]) || t_f[i] <= 0.0 || t_f[i] > 1.0)
            throw Error(cat("raw scan t_f must lie in (0, 1] (got ", t_f[i], " at ", grid[i], " nm)"));
    }
}

double db_to_linear(double value_db) {
    if (!std::isfinite(value_db)) throw Error("db_to_linear: value must be finite");
    return std::pow(10.0, value_db / 10.0);
}

double linear_to_db(double ratio) {
    if (!std::isfinite(ratio) || ratio <= 0.0)
        throw Error(cat("linear_to_db: ratio must be positive and finite (got ", ratio, ")"));
    return 10.0 * std::log10(ratio);
}

TransmittanceSpectrum reduce_raw_scan(const RawScan& raw) {
    std::vector<double> out(raw.grid.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = -10.0 * std::log10(raw.i_ref[i] * raw.t_f[i] / raw.i_mes[i]);
    return TransmittanceSpectrum(raw.grid, std::move(out));
}

TransmittanceSpectrum resample(const TransmittanceSpectrum& s, const WavelengthGrid& target,
                               const ResamplePolicy& policy) {
    if (s.grid.empty()) throw Error("resample: source spectrum is empty");
    if (target.empty()) throw Error("resample: target grid is empty");
    if (target == s.grid) return s;

    const auto& xs = s.grid.points();
    std::vector<double> out(target.size());
    std::optional<std::vector<double>> out_unc;
    if (s.uncertainty_db) out_unc = std::vector<double>(target.size());

    for (std::size_t k = 0; k < target.size(); ++k) {
        const double x = target[k];
        if (x < xs.front() || x > xs.back()) {
            switch (policy.mode) {
                case ResamplePolicy::OutOfRange::kError:
                    throw Error(cat("resample: target point ", x, " nm outside source span [", xs.front(),
                                    ", ", xs.back(), "] nm"));
                case ResamplePolicy::OutOfRange::kClampToEdge: {
                    const std::size_t edge = (x < xs.front()) ? 0 : xs.size() - 1;
                    out[k] = s.values_db[edge];
                    if (out_unc) (*out_unc)[k] = (*s.uncertainty_db)[edge];
                    break;
                }
                case ResamplePolicy::OutOfRange::kFill:
                    if (!std::isfinite(policy.fill_db)) throw Error("resample: fill level must be finite");
                    out[k] = policy.fill_db;
                    if (out_unc) (*out_unc)[k] = 0.0;
                    break;
            }
            continue;
        }
        const auto it = std::lower_bound(xs.begin(), xs.end(), x);
        const auto j = static_cast<std::size_t>(it - xs.begin());
        if (j < xs.size() && xs[j] == x) {
            out[k] = s.values_db[j];
            if (out_unc) (*out_unc)[k] = (*s.uncertainty_db)[j];
            continue;
        }
        const double x0 = xs[j - 1], x1 = xs[j];
        const double t = (x - x0) / (x1 - x0);
        out[k] = s.values_db[j - 1] + (s.values_db[j] - s.values_db[j - 1]) * t;
        if (out_unc)
            (*out_unc)[k] = (*s.uncertainty_db)[j - 1] +
                            ((*s.uncertainty_db)[j] - (*s.uncertainty_db)[j - 1]) * t;
    }
    return TransmittanceSpectrum(target, std::move(out), std::move(out_unc));
}

TransmittanceSpectrum add_db(const TransmittanceSpectrum& a, const TransmittanceSpectrum& b) {
    if (!(a.grid == b.grid))
        throw Error(cat("add_db: grid mismatch (", a.grid.size(), " vs ", b.grid.size(), " points)"));
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values_db[i] + b.values_db[i];
    std::optional<std::vector<double>> unc;
    if (a.uncertainty_db && b.uncertainty_db) {
        unc = std::vector<double>(a.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            (*unc)[i] = std::hypot((*a.uncertainty_db)[i], (*b.uncertainty_db)[i]);
    }
    return TransmittanceSpectrum(a.grid, std::move(out), std::move(unc));
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

double parse_number(const std::string& field, const std::string& path, std::size_t line_no) {
    if (field.empty()) throw Error(cat(path, ":", line_no, ": empty numeric field"));
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size())
        throw Error(cat(path, ":", line_no, ": cannot parse '", field, "' as a number"));
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // one per data line
    std::vector<std::size_t> line_numbers;
};

CsvTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(cat("cannot open '", path, "'"));
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (table.header.empty()) {
            table.header = split_fields(t);
            continue;
        }
        const auto fields = split_fields(t);
        if (fields.size() != table.header.size())
            throw Error(cat(path, ":", line_no, ": expected ", table.header.size(), " fields, got ",
                            fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_number(f, path, line_no));
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(line_no);
    }
    if (table.header.empty()) throw Error(cat(path, ": no header line found"));
    if (table.rows.empty()) throw Error(cat(path, ": no data rows"));
    return table;
}

void expect_header(const CsvTable& t, const std::string& path,
                   const std::vector<std::vector<std::string>>& accepted) {
    for (const auto& h : accepted)
        if (t.header == h) return;
    std::string got;
    for (std::size_t i = 0; i < t.header.size(); ++i) got += (i ? "," : "") + t.header[i];
    std::string want;
    for (std::size_t i = 0; i < accepted.front().size(); ++i)
        want += (i ? "," : "") + accepted.front()[i];
    throw Error(cat(path, ": unexpected header '", got, "' (want '", want, "', ...)"));
}

}  // namespace

TransmittanceSpectrum load_spectrum_csv(const std::string& path, bool allow_gain) {
    const CsvTable t = load_csv(path);
    expect_header(t, path,
                  {{"wavelength_nm", "transmittance_db"},
                   {"wavelength_nm", "transmittance_db", "uncertainty_db"}});
    const bool has_unc = t.header.size() == 3;
    std::vector<double> wl, val, unc;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto line_no = t.line_numbers[r];
        const double x = t.rows[r][0];
        if (!wl.empty() && x <= wl.back())
            throw Error(cat(path, ":", line_no, ": wavelengths must be strictly increasing (", wl.back(),
                            " then ", x, ")"));
        const double v = t.rows[r][1];
        if (!std::isfinite(v)) throw Error(cat(path, ":", line_no, ": transmittance must be finite"));
        if (v > 0.0 && !allow_gain)
            throw Error(cat(path, ":", line_no, ": positive transmittance ", v, " dB at ", x,
                            " nm; passive data must be <= 0 dB (enable gain to accept)"));
        wl.push_back(x);
        val.push_back(v);
        if (has_unc) unc.push_back(t.rows[r][2]);
    }
    try {
        return TransmittanceSpectrum(WavelengthGrid(std::move(wl)), std::move(val),
                                     has_unc ? std::optional(std::move(unc)) : std::nullopt);
    } catch (const Error& e) {
        throw Error(cat(path, ": ", e.what()));
    }
}

void save_spectrum_csv(const std::string& path, const TransmittanceSpectrum& s) {
    std::string out;
    out += s.uncertainty_db ? "wavelength_nm,transmittance_db,uncertainty_db\n"
                            : "wavelength_nm,transmittance_db\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_g10(s.grid[i]);
        out += ',';
        out += format_g6(s.values_db[i]);
        if (s.uncertainty_db) {
            out += ',';
            out += format_g6((*s.uncertainty_db)[i]);
        }
        out += '\n';
    }
    atomic_write_file(path, out);
}

RawScan load_raw_scan_csv(const std::string& path) {
    const CsvTable t = load_csv(path);
    expect_header(t, path, {{"wavelength_nm", "i_ref", "i_mes", "t_f"}});
    std::vector<double> wl, ref, mes, filt;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto line_no = t.line_numbers[r];
        const double x = t.rows[r][0];
        if (!wl.empty() && x <= wl.back())
            throw Error(cat(path, ":", line_no, ": wavelengths must be strictly increasing"));
        wl.push_back(x);
        ref.push_back(t.rows[r][1]);
        mes.push_back(t.rows[r][2]);
        filt.push_back(t.rows[r][3]);
    }
    try {
        return RawScan(WavelengthGrid(std::move(wl)), std::move(ref), std::move(mes), std::move(filt));
    } catch (const Error& e) {
        throw Error(cat(path, ": ", e.what()));
    }
}

}  // namespace thra
