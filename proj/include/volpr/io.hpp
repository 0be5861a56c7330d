#pragma once

// File formats. CSV numbers are written with "%.17e"; tensors are a JSON
// header next to a little-endian float64 (or complex128) binary file.

#include "volpr/coefficients.hpp"
#include "volpr/engine.hpp"
#include "volpr/excitation.hpp"
#include "volpr/frf.hpp"
#include "volpr/identify.hpp"
#include "volpr/oracle.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace volpr::io {

namespace fs = std::filesystem;

/// {"horizon": T or null, "terms": [{"c": [re, im], "k": k, "lambda": [re, im],
///   "tags": [["S"|"E", source], ...]}]}; coefficients as 36-digit strings.
nlohmann::json to_json(const PolyExpSum& s);
PolyExpSum polyexp_from_json(const nlohmann::json& j);

/// Rows alpha_re, alpha_im, lambda_re, lambda_im after "# key=value" lines
/// for horizon, dt and relative_fit.
void write_exponential_signal(const fs::path& path, const ExponentialSignal& s);
ExponentialSignal read_exponential_signal(const fs::path& path);

/// Two columns t, f with a uniform t.
SampledSignal read_sampled_signal(const fs::path& path);
void write_sampled_signal(const fs::path& path, const SampledSignal& s);

/// Three columns t, f, y.
IoRecord read_io_record(const fs::path& path);
void write_io_record(const fs::path& path, const IoRecord& r);

/// `stem`.json + `stem`.bin
void write_coefficients(const fs::path& stem, const KernelCoefficients& c);
KernelCoefficients read_coefficients(const fs::path& header);
void write_frf(const fs::path& stem, const FrfGrid& frf);
void write_kernel(const fs::path& stem, const SampledKernel& k);

/// Columns t, y1, y2, y3, total, y_s, y_c, y_f; missing orders are zero.
void write_response(const fs::path& path, const ResponseTable& table);
void write_trajectory(const fs::path& path, const Trajectory& tr);

/// Generic numeric table with a header row.
void write_table(const fs::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns);

std::string format_number(double v);

} // namespace volpr::io
