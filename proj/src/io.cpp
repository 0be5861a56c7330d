#include "volpr/io.hpp"

#include "volpr/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace volpr::io {

namespace {

std::string ext_string(const ExtReal& v)
{
    return v.str(36, std::ios_base::scientific);
}

ExtReal ext_parse(const nlohmann::json& j)
{
    if (j.is_string()) return ExtReal(j.get<std::string>());
    return ExtReal(j.get<double>());
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in)
{
    std::ifstream in(path, mode);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

// Numeric CSV rows; '#' lines are returned separately, a non-numeric first
// row is treated as a header.
struct Csv {
    std::vector<std::string> comments;
    std::vector<std::vector<double>> rows;
};

Csv read_csv(const fs::path& path)
{
    auto in = open_in(path);
    Csv csv;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            csv.comments.push_back(line.substr(1));
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw Error("non-numeric row in " + path.string() + ": " + line);
        }
        first = false;
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

double uniform_step(const std::vector<std::vector<double>>& rows, const fs::path& path)
{
    if (rows.size() < 2) throw Error(path.string() + " needs at least two samples");
    const double dt = rows[1][0] - rows[0][0];
    if (!(dt > 0.0)) throw Error(path.string() + " has a non-increasing time column");
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (std::abs(rows[i][0] - rows[0][0] - static_cast<double>(i) * dt) > 1e-6 * dt)
            throw Error(path.string() + " is not uniformly sampled");
    return dt;
}

template <class T>
void write_binary(const fs::path& path, const std::vector<T>& data)
{
    auto out = open_out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(T)));
}

void write_json(const fs::path& path, const nlohmann::json& j)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

} // namespace

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

nlohmann::json to_json(const PolyExpSum& s)
{
    nlohmann::json j;
    j["horizon"] = std::isfinite(s.horizon()) ? nlohmann::json(s.horizon()) : nlohmann::json(nullptr);
    auto& terms = j["terms"] = nlohmann::json::array();
    for (const auto& t : s.terms()) {
        nlohmann::json tags = nlohmann::json::array();
        for (const auto& tag : t.tags)
            tags.push_back({tag.origin == PoleOrigin::SystemBasis ? "S" : "E", tag.source});
        terms.push_back({{"c", {ext_string(t.coefficient.real()), ext_string(t.coefficient.imag())}},
                         {"k", t.power},
                         {"lambda", {t.exponent.real(), t.exponent.imag()}},
                         {"tags", tags}});
    }
    return j;
}

PolyExpSum polyexp_from_json(const nlohmann::json& j)
{
    const double horizon = j.at("horizon").is_null() ? kUnbounded : j.at("horizon").get<double>();
    std::vector<PolyExpTerm> terms;
    for (const auto& item : j.at("terms")) {
        PolyExpTerm t;
        t.coefficient = {ext_parse(item.at("c")[0]), ext_parse(item.at("c")[1])};
        t.power = item.at("k").get<int>();
        t.exponent = {item.at("lambda")[0].get<double>(), item.at("lambda")[1].get<double>()};
        for (const auto& tag : item.at("tags")) {
            const auto origin = tag[0].get<std::string>();
            if (origin != "S" && origin != "E") throw Error("unknown pole tag origin '" + origin + "'");
            t.tags.push_back({origin == "S" ? PoleOrigin::SystemBasis : PoleOrigin::Excitation,
                              tag[1].get<std::uint16_t>()});
        }
        terms.push_back(std::move(t));
    }
    return PolyExpSum(std::move(terms), horizon);
}

void write_exponential_signal(const fs::path& path, const ExponentialSignal& s)
{
    auto out = open_out(path);
    out << "# horizon=" << (std::isfinite(s.horizon) ? format_number(s.horizon) : "inf") << '\n';
    out << "# dt=" << format_number(s.dt) << '\n';
    out << "# relative_fit=" << format_number(s.relative_fit) << '\n';
    out << "alpha_re,alpha_im,lambda_re,lambda_im\n";
    for (const auto& c : s.components)
        out << format_number(c.alpha.real()) << ',' << format_number(c.alpha.imag()) << ','
            << format_number(c.lambda.real()) << ',' << format_number(c.lambda.imag()) << '\n';
}

ExponentialSignal read_exponential_signal(const fs::path& path)
{
    const auto csv = read_csv(path);
    ExponentialSignal s;
    for (const auto& line : csv.comments) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(' '));
        const double value = std::strtod(line.c_str() + eq + 1, nullptr);
        if (key == "horizon") s.horizon = value;
        else if (key == "dt") s.dt = value;
        else if (key == "relative_fit") s.relative_fit = value;
    }
    for (const auto& row : csv.rows) {
        if (row.size() != 4) throw Error(path.string() + ": expected 4 columns per component");
        s.components.push_back({{row[0], row[1]}, {row[2], row[3]}});
    }
    return s;
}

SampledSignal read_sampled_signal(const fs::path& path)
{
    const auto csv = read_csv(path);
    SampledSignal s;
    s.dt = uniform_step(csv.rows, path);
    for (const auto& row : csv.rows) {
        if (row.size() < 2) throw Error(path.string() + ": expected columns t, f");
        s.samples.push_back(row[1]);
    }
    return s;
}

void write_sampled_signal(const fs::path& path, const SampledSignal& s)
{
    write_table(path, {"t", "f"}, {s.times(), s.samples});
}

IoRecord read_io_record(const fs::path& path)
{
    const auto csv = read_csv(path);
    IoRecord r;
    r.dt = uniform_step(csv.rows, path);
    for (const auto& row : csv.rows) {
        if (row.size() < 3) throw Error(path.string() + ": expected columns t, f, y");
        r.input.push_back(row[1]);
        r.output.push_back(row[2]);
    }
    return r;
}

void write_io_record(const fs::path& path, const IoRecord& r)
{
    std::vector<double> t(r.input.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<double>(i) * r.dt;
    write_table(path, {"t", "f", "y"}, {t, r.input, r.output});
}

void write_coefficients(const fs::path& stem, const KernelCoefficients& c)
{
    nlohmann::json header;
    header["kind"] = "laguerre_coefficients";
    header["order"] = c.order;
    nlohmann::json bases = nlohmann::json::array();
    std::vector<std::size_t> shape;
    for (const auto& b : c.bases) {
        bases.push_back({{"a", b.rate()}, {"R", b.max_order()}});
        shape.push_back(static_cast<std::size_t>(b.size()));
    }
    header["bases"] = bases;
    header["shape"] = shape;
    header["dtype"] = "float64";
    header["layout"] = "row-major";
    header["data"] = stem.filename().string() + ".bin";
    write_json(fs::path(stem.string() + ".json"), header);
    write_binary(fs::path(stem.string() + ".bin"), c.values);
}

KernelCoefficients read_coefficients(const fs::path& header_path)
{
    nlohmann::json header;
    {
        auto in = open_in(header_path);
        in >> header;
    }
    std::vector<LaguerreBasis> bases;
    for (const auto& b : header.at("bases"))
        bases.emplace_back(b.at("a").get<double>(), b.at("R").get<int>());
    auto c = KernelCoefficients::zeros(std::move(bases));
    if (header.at("order").get<int>() != c.order) throw Error(header_path.string() + ": order and bases disagree");
    const fs::path data = header_path.parent_path() / header.at("data").get<std::string>();
    auto in = open_in(data, std::ios::binary);
    in.read(reinterpret_cast<char*>(c.values.data()), static_cast<std::streamsize>(c.values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(c.values.size() * sizeof(double)))
        throw Error(data.string() + " is shorter than its header declares");
    return c;
}

void write_frf(const fs::path& stem, const FrfGrid& frf)
{
    nlohmann::json header;
    header["kind"] = "frf";
    header["order"] = frf.order;
    header["dw"] = frf.grid.dw;
    header["half_width"] = frf.grid.half_width;
    header["cutoff"] = frf.grid.cutoff();
    header["shape"] = std::vector<int>(static_cast<std::size_t>(frf.order), frf.grid.size());
    header["dtype"] = "complex128";
    header["layout"] = "row-major, w_j = (j - half_width) dw";
    header["data"] = stem.filename().string() + ".bin";
    write_json(fs::path(stem.string() + ".json"), header);
    write_binary(fs::path(stem.string() + ".bin"), frf.values);
}

void write_kernel(const fs::path& stem, const SampledKernel& k)
{
    nlohmann::json header;
    header["kind"] = "kernel";
    header["order"] = k.order;
    header["dt"] = k.dt;
    header["shape"] = std::vector<std::size_t>(static_cast<std::size_t>(k.order), k.length);
    header["imag_residue"] = k.imag_residue;
    header["dtype"] = "float64";
    header["layout"] = "row-major, t_i = i dt";
    header["data"] = stem.filename().string() + ".bin";
    write_json(fs::path(stem.string() + ".json"), header);
    write_binary(fs::path(stem.string() + ".bin"), k.values);
}

void write_table(const fs::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns)
{
    if (header.size() != columns.size()) throw Error("table header and column count differ");
    auto out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& col : columns)
        if (col.size() != rows) throw Error("table columns differ in length");
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << format_number(columns[c][r]);
        out << '\n';
    }
}

void write_response(const fs::path& path, const ResponseTable& table)
{
    const std::vector<double> zero(table.t.size(), 0.0);
    auto order = [&](std::size_t n) -> const std::vector<double>& {
        return n < table.orders.size() ? table.orders[n] : zero;
    };
    write_table(path, {"t", "y1", "y2", "y3", "total", "y_s", "y_c", "y_f"},
                {table.t, order(0), order(1), order(2), table.total, table.natural, table.cross, table.forced});
}

void write_trajectory(const fs::path& path, const Trajectory& tr)
{
    write_table(path, {"t", "y", "v"}, {tr.t, tr.y, tr.v});
}

} // namespace volpr::io
