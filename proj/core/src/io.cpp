#include "care/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace care::io {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'O', 'L'};
constexpr std::uint8_t kFlagLabels = 0x01;

void append_u16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f32(std::string& buf, float v) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

void append_packed_bits(std::string& buf, const std::vector<std::uint8_t>& bits) {
    const std::size_t n_bytes = (bits.size() + 7) / 8;
    for (std::size_t byte = 0; byte < n_bytes; ++byte) {
        std::uint8_t packed = 0;
        for (std::size_t bit = 0; bit < 8; ++bit) {
            const std::size_t i = byte * 8 + bit;
            if (i < bits.size() && bits[i]) packed |= static_cast<std::uint8_t>(1u << bit);
        }
        buf.push_back(static_cast<char>(packed));
    }
}

struct Reader {
    const std::string& data;
    std::size_t pos = 0;

    void need(std::size_t count) const {
        if (pos + count > data.size()) throw CorruptVolume("volume file is truncated");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data[pos++]);
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() {
        need(4);
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i)
            bits |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data[pos + i])) << (8 * i);
        pos += 4;
        return std::bit_cast<float>(bits);
    }
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

std::vector<std::uint8_t> unpack_bits(Reader& r, std::size_t n) {
    const std::size_t n_bytes = (n + 7) / 8;
    r.need(n_bytes);
    std::vector<std::uint8_t> out(n);
    for (std::size_t byte = 0; byte < n_bytes; ++byte) {
        const auto packed = static_cast<std::uint8_t>(r.data[r.pos + byte]);
        for (std::size_t bit = 0; bit < 8; ++bit) {
            const std::size_t i = byte * 8 + bit;
            if (i < n) {
                out[i] = (packed >> bit) & 1u;
            } else if ((packed >> bit) & 1u) {
                throw CorruptVolume("volume file has nonzero label padding bits");
            }
        }
    }
    r.pos += n_bytes;
    return out;
}

double parse_number(const std::string& key, const std::string& text) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(text, &consumed);
        if (consumed != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + text + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    try {
        std::size_t consumed = 0;
        const std::uint64_t v = std::stoull(text, &consumed);
        if (consumed != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse integer from '" + text + "'");
    }
}

std::string trim(std::string s) {
    const auto is_space = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) s.erase(s.begin());
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
}

class KvLookup {
public:
    KvLookup(std::map<std::string, std::string> kv, std::string origin)
        : kv_(std::move(kv)), origin_(std::move(origin)) {}

    const std::string& require(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end())
            throw ConfigError(origin_ + ": missing key '" + key + "'");
        return it->second;
    }
    double number(const std::string& key) const { return parse_number(key, require(key)); }
    std::uint64_t integer(const std::string& key) const { return parse_u64(key, require(key)); }
    double number_or(const std::string& key, double fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : parse_number(key, it->second);
    }
    std::uint64_t integer_or(const std::string& key, std::uint64_t fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : parse_u64(key, it->second);
    }

private:
    std::map<std::string, std::string> kv_;
    std::string origin_;
};

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_volume(const std::filesystem::path& path, const InstanceVolume& v) {
    validate(v);
    const std::size_t n = v.n_pixels();
    std::string buf;
    buf.reserve(15 + 8 * n + (v.has_labels() ? 2 * ((n + 7) / 8) : 0));
    buf.append(kMagic, sizeof(kMagic));
    append_u16(buf, kVolumeFormatVersion);
    buf.push_back(static_cast<char>(v.has_labels() ? kFlagLabels : 0));
    append_u64(buf, n);
    for (double g : v.g_a) append_f32(buf, static_cast<float>(g));
    for (double g : v.g_b) append_f32(buf, static_cast<float>(g));
    if (v.has_labels()) {
        append_packed_bits(buf, v.y_a);
        append_packed_bits(buf, v.y_b);
    }
    write_file(path, buf);
}

InstanceVolume read_volume(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    Reader r{data};
    r.need(sizeof(kMagic));
    if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
        throw FormatError("'" + path.string() + "' is not a volume file (bad magic)");
    r.pos = sizeof(kMagic);
    const std::uint16_t version = r.u16();
    if (version != kVolumeFormatVersion)
        throw FormatError("'" + path.string() + "': unsupported volume format version " +
                          std::to_string(version));
    const std::uint8_t flags = r.u8();
    if (flags & ~kFlagLabels)
        throw FormatError("'" + path.string() + "': unsupported flags");
    const std::uint64_t n64 = r.u64();
    if (n64 == 0 || n64 > (data.size() / 8))
        throw CorruptVolume("'" + path.string() + "': pixel count does not fit the file");
    const std::size_t n = static_cast<std::size_t>(n64);
    const bool labels = flags & kFlagLabels;

    InstanceVolume v;
    v.id = path.stem().string();
    v.g_a.resize(n);
    v.g_b.resize(n);
    for (std::size_t i = 0; i < n; ++i) v.g_a[i] = static_cast<double>(r.f32());
    for (std::size_t i = 0; i < n; ++i) v.g_b[i] = static_cast<double>(r.f32());
    if (labels) {
        v.y_a = unpack_bits(r, n);
        v.y_b = unpack_bits(r, n);
    }
    if (r.pos != data.size())
        throw CorruptVolume("'" + path.string() + "': trailing bytes after volume data");
    try {
        validate(v);
    } catch (const CorruptVolume& e) {
        throw CorruptVolume("'" + path.string() + "': " + e.what());
    }
    return v;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    nlohmann::ordered_json doc;
    doc["format_version"] = manifest.format_version;
    doc["instances"] = nlohmann::ordered_json::array();
    for (const ManifestEntry& e : manifest.instances) {
        nlohmann::ordered_json item;
        item["id"] = e.id;
        item["file"] = e.file;
        item["n_pixels"] = e.n_pixels;
        item["has_labels"] = e.has_labels;
        item["metadata"] = e.metadata;
        doc["instances"].push_back(std::move(item));
    }
    write_file(path, doc.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(data);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
    DatasetManifest manifest;
    try {
        manifest.format_version = doc.at("format_version").get<int>();
        if (manifest.format_version != 1)
            throw FormatError("'" + path.string() + "': unsupported manifest version");
        for (const auto& item : doc.at("instances")) {
            ManifestEntry e;
            e.id = item.at("id").get<std::string>();
            e.file = item.at("file").get<std::string>();
            e.n_pixels = item.at("n_pixels").get<std::size_t>();
            e.has_labels = item.at("has_labels").get<bool>();
            if (item.contains("metadata"))
                e.metadata = item.at("metadata").get<std::map<std::string, std::string>>();
            manifest.instances.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
    std::map<std::string, int> seen;
    for (const ManifestEntry& e : manifest.instances) {
        if (++seen[e.id] > 1)
            throw FormatError("'" + path.string() + "': duplicate instance id '" + e.id + "'");
    }
    return manifest;
}

InstanceVolume load_instance(const std::filesystem::path& manifest_dir,
                             const ManifestEntry& entry) {
    InstanceVolume v = read_volume(manifest_dir / entry.file);
    v.id = entry.id;
    if (v.n_pixels() != entry.n_pixels)
        throw CorruptVolume("instance '" + entry.id +
                            "': pixel count disagrees with the manifest");
    if (entry.has_labels != v.has_labels())
        throw CorruptVolume("instance '" + entry.id +
                            "': label flag disagrees with the manifest");
    return v;
}

std::map<std::string, std::string> read_kv(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    std::map<std::string, std::string> kv;
    std::istringstream in(data);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

SynthConfig read_synth_config(const std::filesystem::path& path) {
    KvLookup kv(read_kv(path), path.string());
    SynthConfig c;
    c.n_instances = kv.integer("n_instances");
    c.pixels_min = kv.integer("pixels_min");
    c.pixels_max = kv.integer("pixels_max");
    c.p_b_min = kv.number("p_b_min");
    c.p_b_max = kv.number("p_b_max");
    c.ratio_min = kv.number("ratio_min");
    c.ratio_max = kv.number("ratio_max");
    c.temperature = kv.number_or("temperature", 1.0);
    c.noise_sd = kv.number_or("noise_sd", 0.0);
    c.block_size = kv.integer_or("block_size", 1);
    c.seed = kv.integer_or("seed", 0);
    validate(c);
    return c;
}

void write_profile(const std::filesystem::path& path, const ProfileFile& p) {
    std::string out;
    const auto put = [&out](const std::string& key, const std::string& value) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    };
    put("source", std::string(to_string(p.profile.source)));
    put("confidence", format_double(p.split.confidence));
    put("alpha", format_double(p.split.alpha));
    put("delta", format_double(p.split.delta));
    put("q_a", format_double(p.profile.q_a));
    put("q_b", format_double(p.profile.q_b));
    put("q_residual", format_double(p.profile.q_residual));
    put("q_score", format_double(p.profile.q_score));
    put("lambda", format_double(p.lambda));
    put("lambda_fallback", p.lambda_fallback ? "1" : "0");
    put("v_t_max", format_double(p.profile.v_t_max));
    put("n_val", std::to_string(p.profile.n_val));
    put("n_bins", std::to_string(p.n_bins));
    put("u_kind", std::string(to_string(p.u_kind)));
    put("epsilon", format_double(p.epsilon));
    put("voxel_volume", format_double(p.voxel_volume));
    put("coverage_met", p.coverage_met ? "1" : "0");
    write_file(path, out);
}

ProfileFile read_profile(const std::filesystem::path& path) {
    KvLookup kv(read_kv(path), path.string());
    ProfileFile p;
    p.profile.source = parse_bias_source(kv.require("source"));
    p.split.confidence = kv.number("confidence");
    p.split.alpha = kv.number("alpha");
    p.split.delta = kv.number("delta");
    p.profile.q_a = kv.number("q_a");
    p.profile.q_b = kv.number("q_b");
    p.profile.q_residual = kv.number("q_residual");
    p.profile.q_score = kv.number("q_score");
    p.lambda = kv.number("lambda");
    p.lambda_fallback = kv.integer_or("lambda_fallback", 0) != 0;
    p.profile.v_t_max = kv.number("v_t_max");
    p.profile.delta = p.split.delta;
    p.profile.n_val = static_cast<std::size_t>(kv.integer("n_val"));
    p.n_bins = static_cast<std::size_t>(kv.integer("n_bins"));
    p.u_kind = parse_uncertainty_kind(kv.require("u_kind"));
    p.epsilon = kv.number("epsilon");
    p.voxel_volume = kv.number_or("voxel_volume", 0.0);
    p.coverage_met = kv.integer_or("coverage_met", 1) != 0;
    if (!(p.profile.q_a >= 0.0 && p.profile.q_b >= 0.0 && p.profile.q_residual >= 0.0 &&
          p.profile.q_score >= 0.0 && p.profile.v_t_max >= 0.0))
        throw FormatError("'" + path.string() + "': negative quantile");
    if (!(p.split.delta > 0.0 && p.split.delta < 1.0) || p.profile.n_val < 1)
        throw FormatError("'" + path.string() + "': delta outside (0,1) or empty n_val");
    return p;
}

namespace {

const char* kResultsHeader = "id,r_hat,lower,upper,width,method,alpha,delta,degenerate";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

} // namespace

void write_results(const std::filesystem::path& path, std::span<const ResultRow> rows) {
    std::string out;
    out += kResultsHeader;
    out += '\n';
    for (const ResultRow& row : rows) {
        const IntervalEstimate& e = row.interval;
        out += row.id;
        out += ',';
        out += format_double(e.r_hat);
        out += ',';
        out += format_double(e.lower);
        out += ',';
        out += format_double(e.upper);
        out += ',';
        out += format_double(e.width());
        out += ',';
        out += to_string(e.method);
        out += ',';
        out += format_double(e.alpha);
        out += ',';
        out += format_double(e.delta);
        out += ',';
        out += e.degenerate ? '1' : '0';
        out += '\n';
    }
    write_file(path, out);
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    std::istringstream in(data);
    std::string line;
    if (!std::getline(in, line) || trim(line) != kResultsHeader)
        throw FormatError("'" + path.string() + "': unexpected results header");
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 9)
            throw FormatError("'" + path.string() + "': line " + std::to_string(line_no) +
                              " has " + std::to_string(fields.size()) + " fields, expected 9");
        ResultRow row;
        row.id = fields[0];
        row.interval.r_hat = parse_number("r_hat", fields[1]);
        row.interval.lower = parse_number("lower", fields[2]);
        row.interval.upper = parse_number("upper", fields[3]);
        row.interval.method = parse_method(fields[5]);
        row.interval.alpha = parse_number("alpha", fields[6]);
        row.interval.delta = parse_number("delta", fields[7]);
        row.interval.degenerate = parse_u64("degenerate", fields[8]) != 0;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace care::io
