#pragma once

#include <leadnet/metrics.hpp>
#include <leadnet/params.hpp>
#include <leadnet/sweep.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace leadnet::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Malformed or out-of-range configuration; `path` is a JSON pointer to the
/// offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path))
    {
    }
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parsed configuration file. `sweep` is present when the file has a
/// "sweep" section; its base parameters and metrics mirror `model`/`metrics`.
struct Config {
    ModelParams model;
    MetricsConfig metrics;
    std::optional<SweepConfig> sweep;

    friend bool operator==(const Config&, const Config&) = default;
};

inline constexpr int schema_version = 1;
inline constexpr std::uint64_t default_steps = 100000;

inline std::string_view to_string(EligibilityRule rule)
{
    return rule == EligibilityRule::no_outgoing_link ? "no_outgoing_link" : "no_link_either_direction";
}

namespace detail {

inline const json& expect(const json& node, const std::string& path, json::value_t type)
{
    const bool ok = type == json::value_t::number_float ? node.is_number()
                    : type == json::value_t::number_unsigned
                        ? node.is_number_unsigned() ||
                              (node.is_number_integer() && node.get<std::int64_t>() >= 0)
                        : node.type() == type;
    if (!ok) {
        const char* want = type == json::value_t::number_float      ? "a number"
                           : type == json::value_t::number_unsigned ? "a non-negative integer"
                           : type == json::value_t::object          ? "an object"
                           : type == json::value_t::array           ? "an array"
                                                                    : "a string";
        throw ConfigError(path, std::string("expected ") + want + ", got " + node.type_name());
    }
    return node;
}

inline double get_real(const json& node, const std::string& path)
{
    return expect(node, path, json::value_t::number_float).get<double>();
}

inline std::uint64_t get_count(const json& node, const std::string& path)
{
    return expect(node, path, json::value_t::number_unsigned).get<std::uint64_t>();
}

inline std::uint32_t get_u32(const json& node, const std::string& path)
{
    const auto v = get_count(node, path);
    if (v > 0xFFFFFFFFULL) {
        throw ConfigError(path, "value too large");
    }
    return static_cast<std::uint32_t>(v);
}

inline void parse_model(const json& obj, const std::string& base, ModelParams& p)
{
    for (const auto& [key, value] : obj.items()) {
        const std::string path = base + "/" + key;
        if (key == "n") {
            p.n = get_u32(value, path);
        } else if (key == "lambda") {
            p.lambda = get_u32(value, path);
        } else if (key == "r") {
            p.r = get_real(value, path);
        } else if (key == "q") {
            p.q = get_real(value, path);
        } else if (key == "w") {
            p.w = get_real(value, path);
        } else if (key == "steps") {
            p.steps = get_count(value, path);
        } else if (key == "seed") {
            p.seed = get_count(value, path);
        } else if (key == "eligibility") {
            const auto s = expect(value, path, json::value_t::string).get<std::string>();
            if (s == "no_link_either_direction") {
                p.eligibility = EligibilityRule::no_link_either_direction;
            } else if (s == "no_outgoing_link") {
                p.eligibility = EligibilityRule::no_outgoing_link;
            } else {
                throw ConfigError(path, "unknown eligibility rule '" + s + "'");
            }
        } else if (key != "metrics" && key != "sweep") {
            throw ConfigError(path, "unknown key");
        }
    }
}

/// Range checks with the path of the key that breaks them.
inline void check_model(const ModelParams& p)
{
    auto fail = [&](const char* key) {
        try {
            validate(p);
        } catch (const InvalidParams& e) {
            throw ConfigError(std::string("/") + key, e.what());
        }
    };
    if (p.n < 2) {
        fail("n");
    }
    if (p.lambda < 1 || p.lambda > p.n - 1) {
        fail("lambda");
    }
    for (auto [key, v] : {std::pair{"r", p.r}, std::pair{"q", p.q}, std::pair{"w", p.w}}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            fail(key);
        }
    }
}

inline MetricsConfig parse_metrics(const json& obj, const std::string& base)
{
    MetricsConfig m;
    expect(obj, base, json::value_t::object);
    for (const auto& [key, value] : obj.items()) {
        const std::string path = base + "/" + key;
        if (key == "threshold") {
            m.threshold = get_real(value, path);
        } else if (key == "leader_memory") {
            m.leader_memory = get_u32(value, path);
        } else if (key == "episode_min_steps") {
            m.episode_min_steps = get_count(value, path);
        } else if (key == "histogram_sample_period") {
            m.histogram_sample_period = get_count(value, path);
        } else if (key == "p_lead") {
            m.p_lead = get_real(value, path);
        } else if (key == "stable_window") {
            m.stable_window = get_real(value, path);
        } else {
            throw ConfigError(path, "unknown key");
        }
    }
    try {
        validate(m);
    } catch (const InvalidParams& e) {
        throw ConfigError(base, e.what());
    }
    return m;
}

inline SweepConfig parse_sweep(const json& obj, const std::string& base, const ModelParams& model,
                               const MetricsConfig& metrics)
{
    SweepConfig sc;
    sc.base = model;
    sc.metrics = metrics;
    expect(obj, base, json::value_t::object);
    for (const auto& [key, value] : obj.items()) {
        const std::string path = base + "/" + key;
        if (key == "replicates") {
            sc.replicates = get_u32(value, path);
            if (sc.replicates < 1) {
                throw ConfigError(path, "replicates must be at least 1");
            }
        } else if (key == "master_seed") {
            sc.master_seed = get_count(value, path);
        } else if (key == "axes") {
            expect(value, path, json::value_t::array);
            for (std::size_t k = 0; k < value.size(); ++k) {
                const std::string apath = path + "/" + std::to_string(k);
                const auto& axis = expect(value[k], apath, json::value_t::object);
                SweepAxis a;
                for (const auto& [akey, aval] : axis.items()) {
                    if (akey == "param") {
                        a.name = expect(aval, apath + "/param", json::value_t::string).get<std::string>();
                    } else if (akey == "values") {
                        expect(aval, apath + "/values", json::value_t::array);
                        for (std::size_t v = 0; v < aval.size(); ++v) {
                            a.values.push_back(get_real(aval[v], apath + "/values/" + std::to_string(v)));
                        }
                    } else {
                        throw ConfigError(apath + "/" + akey, "unknown key");
                    }
                }
                if (a.name.empty()) {
                    throw ConfigError(apath + "/param", "missing axis name");
                }
                ModelParams probe = model;
                for (std::size_t v = 0; v < a.values.size(); ++v) {
                    try {
                        leadnet::detail::apply_axis(probe, a.name, a.values[v]);
                    } catch (const InvalidParams& e) {
                        throw ConfigError(apath + "/values/" + std::to_string(v), e.what());
                    }
                }
                if (a.values.empty()) {
                    throw ConfigError(apath + "/values", "axis has no values");
                }
                sc.axes.push_back(std::move(a));
            }
        } else {
            throw ConfigError(path, "unknown key");
        }
    }
    return sc;
}

} // namespace detail

/**
 * Parses a JSON configuration. Model keys sit at the top level (n, lambda, r,
 * q, w, steps, seed, eligibility); optional "metrics" and "sweep" objects
 * follow. Missing keys take the baseline r = 0.2, n = 50, lambda = 3,
 * w = 0.5, q = 0.5, threshold 3.0 and steps = 100000.
 */
inline Config parse_config(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    detail::expect(doc, "", json::value_t::object);

    Config c;
    c.model.steps = default_steps;
    detail::parse_model(doc, "", c.model);
    detail::check_model(c.model);
    if (doc.contains("metrics")) {
        c.metrics = detail::parse_metrics(doc["metrics"], "/metrics");
    }
    if (doc.contains("sweep")) {
        c.sweep = detail::parse_sweep(doc["sweep"], "/sweep", c.model, c.metrics);
    }
    return c;
}

inline Config load_config(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline json to_json(const ModelParams& p)
{
    return {{"n", p.n},         {"lambda", p.lambda}, {"r", p.r},       {"q", p.q},
            {"w", p.w},         {"steps", p.steps},   {"seed", p.seed},
            {"eligibility", std::string(to_string(p.eligibility))}};
}

inline json to_json(const MetricsConfig& m)
{
    return {{"threshold", m.threshold},
            {"leader_memory", m.leader_memory},
            {"episode_min_steps", m.episode_min_steps},
            {"histogram_sample_period", m.histogram_sample_period},
            {"p_lead", m.p_lead},
            {"stable_window", m.stable_window}};
}

inline json to_json(const Config& c)
{
    json doc = to_json(c.model);
    doc["metrics"] = to_json(c.metrics);
    if (c.sweep) {
        json axes = json::array();
        for (const auto& a : c.sweep->axes) {
            axes.push_back({{"param", a.name}, {"values", a.values}});
        }
        doc["sweep"] = {{"replicates", c.sweep->replicates},
                        {"master_seed", c.sweep->master_seed},
                        {"axes", axes}};
    }
    return doc;
}

// ---- CSV ----------------------------------------------------------------

/// 17 significant digits, general format with trailing zeros dropped; always
/// reads back to the same double.
inline std::string format_real(double v)
{
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), end);
}

inline double parse_real(std::string_view s)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IoError("bad number '" + std::string(s) + "'");
    }
    return v;
}

inline std::uint64_t parse_uint(std::string_view s)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IoError("bad integer '" + std::string(s) + "'");
    }
    return v;
}

namespace detail {

/// Opens for binary writing (LF line endings everywhere) or throws with the path.
inline std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

inline void finish(std::ofstream& out, const fs::path& path)
{
    out.flush();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

inline std::vector<std::vector<std::string>> read_csv(const fs::path& path,
                                                      std::string_view expected_header)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != expected_header) {
        throw IoError(path.string() + ": expected header '" + std::string(expected_header) + "'");
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

inline void expect_fields(const std::vector<std::string>& row, std::size_t n, const fs::path& path)
{
    if (row.size() != n) {
        throw IoError(path.string() + ": expected " + std::to_string(n) + " fields, got " +
                      std::to_string(row.size()));
    }
}

} // namespace detail

inline constexpr std::string_view timeseries_header = "step,leader_id,leader_status,count_above,total_status";
inline constexpr std::string_view episodes_header = "individual,rise_step,above_from,above_to,tenure_above";
inline constexpr std::string_view histogram_header = "in_degree,frequency";
inline constexpr std::string_view crossings_header = "step,individual,direction";
inline constexpr std::string_view sweep_header =
    "row,point,replicate,n,lambda,r,q,w,steps,seed,new_leaders,episodes,mean_tenure,"
    "median_tenure,frac_0,frac_1,frac_2,frac_3plus,exponent,r_squared,phase,error";

inline void emit_timeseries(std::span<const StepRecord> records, const fs::path& path)
{
    auto out = detail::open_out(path);
    out << timeseries_header << '\n';
    for (const auto& r : records) {
        out << r.step << ',' << r.leader << ',' << format_real(r.leader_status) << ','
            << r.count_above << ',' << format_real(r.total_status) << '\n';
    }
    detail::finish(out, path);
}

inline std::vector<StepRecord> read_timeseries(const fs::path& path)
{
    std::vector<StepRecord> out;
    for (const auto& row : detail::read_csv(path, timeseries_header)) {
        detail::expect_fields(row, 5, path);
        out.push_back({parse_uint(row[0]), static_cast<IndividualId>(parse_uint(row[1])),
                       parse_real(row[2]), static_cast<std::uint32_t>(parse_uint(row[3])),
                       parse_real(row[4])});
    }
    return out;
}

inline void emit_crossings(std::span<const ThresholdCrossing> crossings, const fs::path& path)
{
    auto out = detail::open_out(path);
    out << crossings_header << '\n';
    for (const auto& c : crossings) {
        out << c.step << ',' << c.individual << ',' << (c.up ? "up" : "down") << '\n';
    }
    detail::finish(out, path);
}

inline std::vector<ThresholdCrossing> read_crossings(const fs::path& path)
{
    std::vector<ThresholdCrossing> out;
    for (const auto& row : detail::read_csv(path, crossings_header)) {
        detail::expect_fields(row, 3, path);
        if (row[2] != "up" && row[2] != "down") {
            throw IoError(path.string() + ": direction must be up or down");
        }
        out.push_back({parse_uint(row[0]), static_cast<IndividualId>(parse_uint(row[1])), row[2] == "up"});
    }
    return out;
}

inline void emit_episodes(std::span<const LeaderEpisode> episodes, const fs::path& path)
{
    auto out = detail::open_out(path);
    out << episodes_header << '\n';
    for (const auto& e : episodes) {
        out << e.individual << ',' << e.rise_step << ',' << e.above_from << ',' << e.above_to << ','
            << e.tenure_above << '\n';
    }
    detail::finish(out, path);
}

inline void emit_histogram(const DegreeHistogram& hist, const fs::path& path)
{
    auto out = detail::open_out(path);
    out << histogram_header << '\n';
    for (const auto& [x, f] : hist.counts) { // std::map: ascending in_degree
        out << x << ',' << f << '\n';
    }
    detail::finish(out, path);
}

/// sample_count is not stored in the CSV; it is recovered as total / n.
inline DegreeHistogram read_histogram(const fs::path& path, std::uint32_t n)
{
    DegreeHistogram h;
    for (const auto& row : detail::read_csv(path, histogram_header)) {
        detail::expect_fields(row, 2, path);
        h.counts[static_cast<std::uint32_t>(parse_uint(row[0]))] = parse_uint(row[1]);
    }
    h.sample_count = n > 0 ? h.total() / n : 0;
    return h;
}

inline void emit_sweep(std::span<const SweepRow> rows, const fs::path& path)
{
    auto out = detail::open_out(path);
    out << sweep_header << '\n';
    for (const auto& r : rows) {
        const auto& p = r.params;
        out << r.index << ',' << r.point << ',' << r.replicate << ',' << p.n << ',' << p.lambda << ','
            << format_real(p.r) << ',' << format_real(p.q) << ',' << format_real(p.w) << ','
            << p.steps << ',' << r.seed << ',' << r.new_leaders << ',' << r.episodes << ','
            << format_real(r.mean_tenure) << ',' << format_real(r.median_tenure);
        for (double f : r.count_fractions) {
            out << ',' << format_real(f);
        }
        out << ',' << (r.exponent ? format_real(*r.exponent) : "") << ','
            << (r.r_squared ? format_real(*r.r_squared) : "") << ',' << to_string(r.phase) << ',';
        // errors are free text; keep the row a single CSV record
        std::string err = r.error;
        for (char& ch : err) {
            if (ch == ',' || ch == '\n' || ch == '\r') {
                ch = ';';
            }
        }
        out << err << '\n';
    }
    detail::finish(out, path);
}

/// Every status at one step per row: step,s0,...,s{n-1}.
class StatusSnapshotWriter {
public:
    StatusSnapshotWriter(const fs::path& path, std::uint32_t n) : path_(path), out_(detail::open_out(path))
    {
        out_ << "step";
        for (std::uint32_t i = 0; i < n; ++i) {
            out_ << ",s" << i;
        }
        out_ << '\n';
    }

    void write(const NetworkState& state)
    {
        out_ << state.step();
        for (double s : state.statuses()) {
            out_ << ',' << format_real(s);
        }
        out_ << '\n';
    }

    void close() { detail::finish(out_, path_); }

private:
    fs::path path_;
    std::ofstream out_;
};

/// Final network: one row per individual with status and in-degree, and one
/// row per directed link.
inline void emit_network(const NetworkState& state, const fs::path& nodes_path, const fs::path& links_path)
{
    auto nodes = detail::open_out(nodes_path);
    nodes << "individual,status,in_degree\n";
    for (IndividualId i = 0; i < state.size(); ++i) {
        nodes << i << ',' << format_real(state.status(i)) << ',' << state.in_degree(i) << '\n';
    }
    detail::finish(nodes, nodes_path);
    auto links = detail::open_out(links_path);
    links << "source,target\n";
    for (IndividualId i = 0; i < state.size(); ++i) {
        for (IndividualId j : state.out_links(i)) {
            links << i << ',' << j << '\n';
        }
    }
    detail::finish(links, links_path);
}

// ---- manifest -------------------------------------------------------------

/// Lower-case hex SHA-256 of a file's bytes.
inline std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256 init failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) {
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
        }
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::ostringstream hex;
    for (unsigned int k = 0; k < len; ++k) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
    }
    return hex.str();
}

struct ManifestEntry {
    std::string file; // relative to the manifest's directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string command;
    ModelParams params;
    MetricsConfig metrics;
    std::optional<json> sweep;
    std::uint64_t record_stride = 1;
    double wall_seconds = 0.0;
    std::vector<ManifestEntry> files;

    /// Checksums `name` (inside dir) and lists it.
    void add_file(const fs::path& dir, const std::string& name)
    {
        const auto p = dir / name;
        files.push_back({name, sha256_file(p), fs::file_size(p)});
    }
};

inline json to_json(const RunManifest& m)
{
    json files = json::array();
    for (const auto& f : m.files) {
        files.push_back({{"file", f.file}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    }
    json doc = {{"schema_version", schema_version},
                {"command", m.command},
                {"params", to_json(m.params)},
                {"metrics", to_json(m.metrics)},
                {"seed", m.params.seed},
                {"record_stride", m.record_stride},
                {"wall_seconds", m.wall_seconds},
                {"files", files}};
    if (m.sweep) {
        doc["sweep"] = *m.sweep;
    }
    return doc;
}

inline void write_json(const json& doc, const fs::path& path)
{
    auto out = detail::open_out(path);
    out << doc.dump(2) << '\n';
    detail::finish(out, path);
}

inline json read_json(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

inline RunManifest read_manifest(const fs::path& path)
{
    const json doc = read_json(path);
    RunManifest m;
    try {
        if (doc.at("schema_version").get<int>() != schema_version) {
            throw IoError(path.string() + ": unsupported schema_version");
        }
        m.command = doc.at("command").get<std::string>();
        json model = doc.at("params");
        model["metrics"] = doc.at("metrics");
        const Config c = parse_config(model.dump());
        m.params = c.model;
        m.metrics = c.metrics;
        m.record_stride = doc.value("record_stride", std::uint64_t{1});
        m.wall_seconds = doc.value("wall_seconds", 0.0);
        for (const auto& f : doc.at("files")) {
            m.files.push_back({f.at("file").get<std::string>(), f.at("sha256").get<std::string>(),
                               f.at("bytes").get<std::uintmax_t>()});
        }
        if (doc.contains("sweep")) {
            m.sweep = doc["sweep"];
        }
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return m;
}

/// Names of listed files whose current checksum differs from the manifest.
inline std::vector<std::string> verify_manifest(const RunManifest& m, const fs::path& dir)
{
    std::vector<std::string> bad;
    for (const auto& f : m.files) {
        const auto p = dir / f.file;
        if (!fs::exists(p) || sha256_file(p) != f.sha256) {
            bad.push_back(f.file);
        }
    }
    return bad;
}

/// Run-level observables as written to summary.json / analysis.json.
inline json summary_json(const RunSummary& s, const MetricsConfig& cfg,
                         const std::optional<PowerLawFit>& fit)
{
    auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    json doc = {{"steps", s.steps()},
                {"count_fractions", s.count_fractions(4)},
                {"window_start", s.window_start},
                {"window_count_fractions", s.window_count_fractions(4)},
                {"new_leaders", s.new_leaders},
                {"window_new_leaders", s.window_new_leaders},
                {"episodes", s.episodes.size()},
                {"distinct_episode_leaders", s.distinct_episode_leaders()},
                {"mean_tenure", num(s.mean_tenure())},
                {"median_tenure", num(s.median_tenure())},
                {"replacements", s.lags.size()},
                {"median_replacement_lag", num(s.median_lag())},
                {"max_total_drift", s.max_total_drift},
                {"phase", std::string(to_string(classify_phase(s, cfg)))}};
    if (fit) {
        doc["fit"] = {{"exponent", fit->exponent},
                      {"intercept", fit->intercept},
                      {"r_squared", fit->r_squared},
                      {"x_min", fit->x_min},
                      {"x_max", fit->x_max},
                      {"bins", fit->bins}};
    } else {
        doc["fit"] = nullptr;
    }
    return doc;
}

} // namespace leadnet::io
