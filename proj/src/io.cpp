#include "wayfind/io.hpp"

#include "wayfind/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace wayfind::io {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string(), "", "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + path.string());
}

std::string format_double(double value) {
    if (value == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, res.ptr};
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string digest(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string file_digest(const std::filesystem::path& path) { return digest(read_text(path)); }

namespace {

// --- JSON helpers -----------------------------------------------------------

json parse_json(std::string_view text, const std::string& source) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        std::string what = e.what();
        if (const auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
        throw InputError(source, std::to_string(line), "malformed JSON: " + what);
    }
}

/// Typed access into a JSON document that reports failures by JSON path.
class Doc {
public:
    Doc(const json& value, std::string source, std::string path = "$")
        : value_(value), source_(std::move(source)), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& message) const { throw InputError(source_, path_, message); }

    const json& raw() const { return value_; }
    const std::string& path() const { return path_; }

    bool has(const char* key) const { return value_.is_object() && value_.contains(key); }

    Doc at(const char* key) const {
        if (!value_.is_object()) fail("expected an object");
        const auto it = value_.find(key);
        if (it == value_.end()) fail(std::string("missing field '") + key + "'");
        return {*it, source_, path_ + "." + key};
    }

    std::vector<Doc> items() const {
        if (!value_.is_array()) fail("expected an array");
        std::vector<Doc> out;
        for (std::size_t i = 0; i < value_.size(); ++i)
            out.emplace_back(value_[i], source_, path_ + "[" + std::to_string(i) + "]");
        return out;
    }

    double number() const {
        if (!value_.is_number()) fail("expected a number");
        return value_.get<double>();
    }

    long long integer() const {
        if (value_.is_number_integer()) return value_.get<long long>();
        if (value_.is_number_float()) {
            const double v = value_.get<double>();
            if (std::floor(v) == v && std::abs(v) < 9.0e15) return static_cast<long long>(v);
        }
        fail("expected an integer");
    }

    int int32() const {
        const long long v = integer();
        if (v < INT32_MIN || v > INT32_MAX) fail("integer out of range");
        return static_cast<int>(v);
    }

    std::uint64_t uint64() const {
        if (value_.is_number_unsigned()) return value_.get<std::uint64_t>();
        const long long v = integer();
        if (v < 0) fail("expected a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

    bool boolean() const {
        if (!value_.is_boolean()) fail("expected true or false");
        return value_.get<bool>();
    }

    std::string string() const {
        if (!value_.is_string()) fail("expected a string");
        return value_.get<std::string>();
    }

    std::vector<std::string> strings() const {
        std::vector<std::string> out;
        for (const Doc& d : items()) out.push_back(d.string());
        return out;
    }

    void check_format(const char* key, int expected) const {
        const Doc v = at(key);
        if (v.int32() != expected)
            v.fail("unsupported format version " + std::to_string(v.int32()) + " (expected " +
                   std::to_string(expected) + ")");
    }

private:
    const json& value_;
    std::string source_;
    std::string path_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// --- CSV helpers ------------------------------------------------------------

struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
};

std::vector<std::string> split_csv_line(std::string_view line, const std::string& source, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw InputError(source, std::to_string(line_no), "unterminated quoted field");
    out.push_back(std::move(cur));
    return out;
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
    CsvTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto fields = split_csv_line(line, source, line_no);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size())
            throw InputError(source, std::to_string(line_no),
                             "expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        t.rows.push_back({std::move(fields), line_no});
    }
    if (t.header.empty()) throw InputError(source, "1", "missing header row");
    return t;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& expected, const std::string& source) {
    if (t.header != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        throw InputError(source, "1", "unexpected header; expected '" + want + "'");
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

double parse_number(const std::string& s, const std::string& source, std::size_t line, const char* column) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw InputError(source, std::to_string(line), std::string("column '") + column + "': '" + s + "' is not a number");
    return v;
}

long long parse_integer(const std::string& s, const std::string& source, std::size_t line, const char* column) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InputError(source, std::to_string(line), std::string("column '") + column + "': '" + s + "' is not an integer");
    return v;
}

int parse_task(const std::string& s, const std::string& source, std::size_t line) {
    const long long t = parse_integer(s, source, line, "task");
    if (t < 1 || t > 4) throw InputError(source, std::to_string(line), "task must be in 1..4");
    return static_cast<int>(t);
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s;
}

} // namespace

// --- networks ---------------------------------------------------------------

NetworkDescription parse_network(std::string_view text, const std::string& source) {
    const json j = parse_json(text, source);
    const Doc root(j, source);
    root.check_format("format", kFormatVersion);
    NetworkDescription d;
    for (const Doc& l : root.at("levels").items()) d.levels.push_back(l.int32());
    if (root.has("ground_level")) d.ground_level = root.at("ground_level").int32();
    for (const Doc& n : root.at("nodes").items()) {
        Node node;
        node.id = n.at("id").string();
        node.level = n.at("level").int32();
        const Doc kind = n.at("kind");
        const auto k = parse_node_kind(kind.string());
        if (!k) kind.fail("unknown node kind '" + kind.string() + "'");
        node.kind = *k;
        node.position = {n.at("x").number(), n.at("y").number()};
        if (n.has("corridor")) {
            const Doc c = n.at("corridor");
            const auto corridor = parse_corridor(c.string());
            if (!corridor) c.fail("unknown corridor '" + c.string() + "'");
            node.corridor = *corridor;
        }
        d.nodes.push_back(std::move(node));
    }
    for (const Doc& l : root.at("links").items()) {
        Link link;
        link.a = l.at("a").string();
        link.b = l.at("b").string();
        const Doc kind = l.at("kind");
        const auto k = parse_link_kind(kind.string());
        if (!k) kind.fail("unknown link kind '" + kind.string() + "'");
        link.kind = *k;
        d.links.push_back(std::move(link));
    }
    return d;
}

IndoorNetwork read_network(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    const NetworkDescription d = parse_network(text, path.string());
    try {
        return IndoorNetwork::build(d);
    } catch (const InputError& e) {
        throw InputError(path.string(), e.location(), e.detail());
    }
}

std::string network_to_json(const IndoorNetwork& net) {
    json j;
    j["format"] = kFormatVersion;
    j["levels"] = net.levels();
    j["ground_level"] = net.ground_level();
    json nodes = json::array();
    for (const Node& n : net.nodes()) {
        json o{{"id", n.id},
               {"level", n.level},
               {"kind", std::string(to_string(n.kind))},
               {"x", n.position.x},
               {"y", n.position.y}};
        if (n.corridor != Corridor::None) o["corridor"] = std::string(to_string(n.corridor));
        nodes.push_back(std::move(o));
    }
    j["nodes"] = std::move(nodes);
    json links = json::array();
    for (const Link& l : net.links()) links.push_back({{"a", l.a}, {"b", l.b}, {"kind", std::string(to_string(l.kind))}});
    j["links"] = std::move(links);
    return dump(j);
}

// --- transforms and control points -----------------------------------------

std::vector<FloorTransform> parse_transforms(std::string_view text, const std::string& source) {
    const json j = parse_json(text, source);
    const Doc root(j, source);
    root.check_format("format", kFormatVersion);
    std::vector<FloorTransform> out;
    for (const Doc& t : root.at("transforms").items()) {
        FloorTransform f;
        f.level = t.at("level").int32();
        f.scale = t.at("scale").number();
        f.rotation = t.at("rotation").number();
        f.tx = t.at("tx").number();
        f.ty = t.at("ty").number();
        f.z_min = t.at("z_min").number();
        f.z_max = t.at("z_max").number();
        if (t.has("rms_residual")) f.rms_residual = t.at("rms_residual").number();
        if (t.has("max_residual")) f.max_residual = t.at("max_residual").number();
        if (!(f.scale > 0)) t.at("scale").fail("scale must be positive");
        out.push_back(f);
    }
    try {
        check_transform_table(out);
    } catch (const InputError& e) {
        throw InputError(source, "$.transforms", e.detail());
    }
    return out;
}

std::vector<FloorTransform> read_transforms(const std::filesystem::path& path) {
    return parse_transforms(read_text(path), path.string());
}

std::string transforms_to_json(std::span<const FloorTransform> transforms) {
    json arr = json::array();
    for (const FloorTransform& t : transforms) {
        arr.push_back({{"level", t.level},
                       {"scale", t.scale},
                       {"rotation", t.rotation},
                       {"tx", t.tx},
                       {"ty", t.ty},
                       {"z_min", t.z_min},
                       {"z_max", t.z_max},
                       {"rms_residual", t.rms_residual},
                       {"max_residual", t.max_residual}});
    }
    return dump(json{{"format", kFormatVersion}, {"transforms", std::move(arr)}});
}

std::vector<ControlPointPair> parse_control_points(std::string_view text, const std::string& source) {
    const CsvTable t = parse_csv(text, source);
    expect_header(t, {"level", "vx", "vy", "vz", "mx", "my"}, source);
    std::vector<ControlPointPair> out;
    for (const CsvRow& r : t.rows) {
        const auto& f = r.fields;
        ControlPointPair p;
        p.level = static_cast<int>(parse_integer(f[0], source, r.line, "level"));
        p.virtual_point = {parse_number(f[1], source, r.line, "vx"), parse_number(f[2], source, r.line, "vy"),
                           parse_number(f[3], source, r.line, "vz")};
        p.map_point = {parse_number(f[4], source, r.line, "mx"), parse_number(f[5], source, r.line, "my")};
        out.push_back(p);
    }
    return out;
}

std::string control_points_to_csv(std::span<const ControlPointPair> pairs) {
    std::string out = "level,vx,vy,vz,mx,my\n";
    for (const auto& p : pairs) {
        out += std::to_string(p.level) + "," + format_double(p.virtual_point.x) + "," +
               format_double(p.virtual_point.y) + "," + format_double(p.virtual_point.z) + "," +
               format_double(p.map_point.x) + "," + format_double(p.map_point.y) + "\n";
    }
    return out;
}

std::vector<FloorTransform> transforms_from_control_points(std::span<const ControlPointPair> pairs,
                                                           double half_band) {
    if (!(half_band > 0)) throw Error("z band half-width must be positive");
    std::set<int> levels;
    for (const auto& p : pairs) levels.insert(p.level);
    if (levels.empty()) throw Error("no control points");
    std::vector<FloorTransform> out;
    for (int level : levels) {
        FloorTransform t = estimate_transform(pairs, level);
        double sum = 0.0;
        int n = 0;
        for (const auto& p : pairs) {
            if (p.level != level) continue;
            sum += p.virtual_point.z;
            ++n;
        }
        const double z = sum / n;
        t.z_min = z - half_band;
        t.z_max = z + half_band;
        out.push_back(t);
    }
    check_transform_table(out);
    return out;
}

// --- trajectories, sequences, profiles ---------------------------------------

namespace {

const std::vector<std::string> kTrajectoryHeader{"participant", "task",  "t_ms",  "x",      "y",      "z",
                                                 "yaw",         "roll",  "pitch", "gaze_x", "gaze_y", "gaze_z"};

} // namespace

std::vector<Trajectory> parse_trajectories(std::string_view text, const std::string& source) {
    const CsvTable t = parse_csv(text, source);
    expect_header(t, kTrajectoryHeader, source);
    std::vector<Trajectory> out;
    std::map<std::pair<std::string, int>, std::size_t> slot;
    for (const CsvRow& r : t.rows) {
        const auto& f = r.fields;
        if (f[0].empty()) throw InputError(source, std::to_string(r.line), "empty participant id");
        const int task = parse_task(f[1], source, r.line);
        const auto key = std::make_pair(f[0], task);
        auto it = slot.find(key);
        if (it == slot.end()) {
            it = slot.emplace(key, out.size()).first;
            out.push_back({f[0], task, {}});
        }
        TrajectorySample s;
        s.t_ms = parse_integer(f[2], source, r.line, "t_ms");
        s.position = {parse_number(f[3], source, r.line, "x"), parse_number(f[4], source, r.line, "y"),
                      parse_number(f[5], source, r.line, "z")};
        s.head = {parse_number(f[6], source, r.line, "yaw"), parse_number(f[7], source, r.line, "roll"),
                  parse_number(f[8], source, r.line, "pitch")};
        s.gaze = {parse_number(f[9], source, r.line, "gaze_x"), parse_number(f[10], source, r.line, "gaze_y"),
                  parse_number(f[11], source, r.line, "gaze_z")};
        out[it->second].samples.push_back(s);
    }
    return out;
}

std::string trajectories_to_csv(std::span<const Trajectory> trajectories) {
    std::string out;
    for (std::size_t i = 0; i < kTrajectoryHeader.size(); ++i) out += (i ? "," : "") + kTrajectoryHeader[i];
    out += "\n";
    for (const Trajectory& t : trajectories) {
        const std::string prefix = csv_field(t.participant) + "," + std::to_string(t.task) + ",";
        for (const TrajectorySample& s : t.samples) {
            out += prefix;
            out += std::to_string(s.t_ms) + "," + fixed3(s.position.x) + "," + fixed3(s.position.y) + "," +
                   fixed3(s.position.z) + "," + fixed3(s.head.yaw) + "," + fixed3(s.head.roll) + "," +
                   fixed3(s.head.pitch) + "," + fixed3(s.gaze.x) + "," + fixed3(s.gaze.y) + "," + fixed3(s.gaze.z) +
                   "\n";
        }
    }
    return out;
}

std::vector<DecisionSequence> parse_sequences(std::string_view text, const std::string& source) {
    const CsvTable t = parse_csv(text, source);
    expect_header(t, {"participant", "task", "ordinal", "node_id"}, source);
    std::vector<DecisionSequence> out;
    std::map<std::pair<std::string, int>, std::size_t> slot;
    for (const CsvRow& r : t.rows) {
        const auto& f = r.fields;
        const int task = parse_task(f[1], source, r.line);
        const auto key = std::make_pair(f[0], task);
        auto it = slot.find(key);
        if (it == slot.end()) {
            it = slot.emplace(key, out.size()).first;
            out.push_back({f[0], task, {}});
        }
        auto& seq = out[it->second];
        const long long ordinal = parse_integer(f[2], source, r.line, "ordinal");
        if (ordinal != static_cast<long long>(seq.nodes.size()))
            throw InputError(source, std::to_string(r.line),
                             "ordinal " + std::to_string(ordinal) + " out of order (expected " +
                                 std::to_string(seq.nodes.size()) + ")");
        if (f[3].empty()) throw InputError(source, std::to_string(r.line), "empty node id");
        seq.nodes.push_back(f[3]);
    }
    return out;
}

std::string sequences_to_csv(std::span<const DecisionSequence> sequences) {
    std::string out = "participant,task,ordinal,node_id\n";
    for (const DecisionSequence& s : sequences)
        for (std::size_t i = 0; i < s.nodes.size(); ++i)
            out += csv_field(s.participant) + "," + std::to_string(s.task) + "," + std::to_string(i) + "," +
                   csv_field(s.nodes[i]) + "\n";
    return out;
}

std::map<std::string, PersonProfile> parse_profiles(std::string_view text, const std::string& source) {
    const CsvTable t = parse_csv(text, source);
    std::vector<std::string> header{"participant"};
    header.insert(header.end(), kProfileFields.begin(), kProfileFields.end());
    expect_header(t, header, source);
    std::map<std::string, PersonProfile> out;
    for (const CsvRow& r : t.rows) {
        const auto& f = r.fields;
        PersonProfile p;
        p.gender = f[1];
        p.age = parse_number(f[2], source, r.line, "age");
        p.height = parse_number(f[3], source, r.line, "height");
        p.education = f[4];
        p.vr_experience = f[5];
        p.gaming_experience = f[6];
        p.building_familiarity = f[7];
        p.evacuation_experience = f[8];
        p.device = f[9];
        if (!out.emplace(f[0], std::move(p)).second)
            throw InputError(source, std::to_string(r.line), "duplicate participant '" + f[0] + "'");
    }
    return out;
}

std::string profiles_to_csv(const std::map<std::string, PersonProfile>& profiles) {
    std::string out = "participant";
    for (const char* field : kProfileFields) out += std::string(",") + field;
    out += "\n";
    for (const auto& [who, p] : profiles) {
        out += csv_field(who) + "," + csv_field(p.gender) + "," + format_double(p.age) + "," +
               format_double(p.height) + "," + csv_field(p.education) + "," + csv_field(p.vr_experience) + "," +
               csv_field(p.gaming_experience) + "," + csv_field(p.building_familiarity) + "," +
               csv_field(p.evacuation_experience) + "," + csv_field(p.device) + "\n";
    }
    return out;
}

// --- datasets ---------------------------------------------------------------

std::filesystem::path encoders_path(const std::filesystem::path& table) {
    std::filesystem::path p = table;
    p.replace_extension(".encoders.json");
    return p;
}

std::string dataset_to_csv(const Dataset& ds) {
    std::string out = "participant,task";
    for (const auto& name : ds.feature_names) out += "," + csv_field(name);
    out += ",target\n";
    for (const Sample& s : ds.samples) {
        out += csv_field(s.participant) + "," + std::to_string(s.task);
        for (double v : s.features) out += "," + format_double(v);
        out += "," + std::to_string(s.target) + "\n";
    }
    return out;
}

std::string dataset_schema_json(const Dataset& ds) {
    json encoders = json::object();
    for (const auto& [field, enc] : ds.profile_encoders) encoders[field] = enc.categories();
    return dump(json{{"format", kFormatVersion},
                     {"lag", ds.lag},
                     {"start_code", kStartCode},
                     {"feature_names", ds.feature_names},
                     {"node_encoder", ds.node_encoder.categories()},
                     {"profile_encoders", std::move(encoders)}});
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
    write_text(path, dataset_to_csv(ds));
    write_text(encoders_path(path), dataset_schema_json(ds));
}

Dataset read_dataset(const std::filesystem::path& path) {
    const std::filesystem::path sidecar = encoders_path(path);
    const std::string schema_text = read_text(sidecar);
    const json j = parse_json(schema_text, sidecar.string());
    const Doc root(j, sidecar.string());
    root.check_format("format", kFormatVersion);

    Dataset ds;
    ds.lag = root.at("lag").int32();
    if (ds.lag < 1) root.at("lag").fail("lag must be >= 1");
    ds.feature_names = root.at("feature_names").strings();
    const Doc nodes = root.at("node_encoder");
    const auto categories = nodes.strings();
    if (categories.empty()) nodes.fail("empty node encoder");
    ds.node_encoder = LabelEncoder::fit(categories);
    if (ds.node_encoder.categories() != categories) nodes.fail("node encoder categories must be sorted and unique");
    const Doc profile = root.at("profile_encoders");
    if (!profile.raw().is_object()) profile.fail("expected an object");
    for (const auto& [field, values] : profile.raw().items()) {
        const Doc d(values, sidecar.string(), profile.path() + "." + field);
        const auto cats = d.strings();
        if (cats.empty()) d.fail("empty encoder");
        ds.profile_encoders.emplace(field, LabelEncoder::fit(cats));
    }

    const std::string source = path.string();
    const CsvTable t = parse_csv(read_text(path), source);
    std::vector<std::string> header{"participant", "task"};
    header.insert(header.end(), ds.feature_names.begin(), ds.feature_names.end());
    header.push_back("target");
    expect_header(t, header, source);
    const std::size_t nf = ds.feature_names.size();
    for (const CsvRow& r : t.rows) {
        Sample s;
        s.participant = r.fields[0];
        s.task = parse_task(r.fields[1], source, r.line);
        for (std::size_t k = 0; k < nf; ++k)
            s.features.push_back(parse_number(r.fields[2 + k], source, r.line, ds.feature_names[k].c_str()));
        const long long target = parse_integer(r.fields[2 + nf], source, r.line, "target");
        if (target < 0 || target >= ds.n_classes())
            throw InputError(source, std::to_string(r.line), "target code outside the node encoder");
        s.target = static_cast<int>(target);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

std::string dataset_hash(const Dataset& ds) { return digest(dataset_to_csv(ds) + dataset_schema_json(ds)); }

// --- models -----------------------------------------------------------------

namespace {

json forest_json(const RandomForestModel& m) {
    json params{{"n_trees", m.params.n_trees},
                {"max_depth", m.params.max_depth},
                {"seed", m.params.seed},
                {"min_samples_split", m.params.min_samples_split},
                {"bootstrap", m.params.bootstrap}};
    params["mtry"] = m.params.mtry ? json(*m.params.mtry) : json(nullptr);
    json trees = json::array();
    for (const DecisionTree& t : m.trees) {
        json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
             depth = json::array(), counts = json::array();
        for (const TreeNode& n : t.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            depth.push_back(n.depth);
            json c = json::array();
            for (const auto& [cls, count] : n.class_counts) c.push_back({cls, count});
            counts.push_back(std::move(c));
        }
        trees.push_back({{"feature", std::move(feature)},
                         {"threshold", std::move(threshold)},
                         {"left", std::move(left)},
                         {"right", std::move(right)},
                         {"depth", std::move(depth)},
                         {"class_counts", std::move(counts)}});
    }
    return {{"model_format", kFormatVersion},
            {"algo", "rf"},
            {"params", std::move(params)},
            {"n_classes", m.n_classes},
            {"feature_names", m.feature_names},
            {"trees", std::move(trees)}};
}

json logistic_json(const LogisticModel& m) {
    json cfg{{"learning_rate", m.config.learning_rate},
             {"max_iters", m.config.max_iters},
             {"l2", m.config.l2},
             {"seed", m.config.seed},
             {"tolerance", m.config.tolerance},
             {"standardize", m.config.standardize}};
    return {{"model_format", kFormatVersion},
            {"algo", "mlr"},
            {"params", std::move(cfg)},
            {"n_classes", m.n_classes},
            {"feature_names", m.feature_names},
            {"iterations", m.training_log.iterations},
            {"final_log_likelihood", m.training_log.final_log_likelihood},
            {"weights", m.weights}};
}

RandomForestModel forest_from(const Doc& root) {
    RandomForestModel m;
    const Doc p = root.at("params");
    m.params.n_trees = p.at("n_trees").int32();
    m.params.max_depth = p.at("max_depth").int32();
    m.params.seed = p.at("seed").uint64();
    m.params.min_samples_split = p.at("min_samples_split").int32();
    m.params.bootstrap = p.at("bootstrap").boolean();
    if (p.has("mtry") && !p.at("mtry").raw().is_null()) m.params.mtry = p.at("mtry").int32();
    m.n_classes = root.at("n_classes").int32();
    m.feature_names = root.at("feature_names").strings();
    const int nf = static_cast<int>(m.feature_names.size());
    for (const Doc& t : root.at("trees").items()) {
        const auto feature = t.at("feature").items();
        const auto threshold = t.at("threshold").items();
        const auto left = t.at("left").items();
        const auto right = t.at("right").items();
        const auto depth = t.at("depth").items();
        const auto counts = t.at("class_counts").items();
        const std::size_t n = feature.size();
        if (n == 0) t.fail("tree has no nodes");
        if (threshold.size() != n || left.size() != n || right.size() != n || depth.size() != n || counts.size() != n)
            t.fail("tree arrays differ in length");
        DecisionTree tree;
        for (std::size_t i = 0; i < n; ++i) {
            TreeNode node;
            node.feature = feature[i].int32();
            node.threshold = threshold[i].number();
            node.left = left[i].int32();
            node.right = right[i].int32();
            node.depth = depth[i].int32();
            for (const Doc& pair : counts[i].items()) {
                const auto cc = pair.items();
                if (cc.size() != 2) pair.fail("expected [class, count]");
                node.class_counts.emplace_back(cc[0].int32(), cc[1].int32());
            }
            if (node.feature >= nf) feature[i].fail("feature index out of range");
            if (!node.is_leaf()) {
                const auto valid = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
                if (!valid(node.left) || !valid(node.right)) left[i].fail("child index out of range");
            } else if (node.class_counts.empty()) {
                counts[i].fail("leaf without class counts");
            }
            tree.nodes.push_back(std::move(node));
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

LogisticModel logistic_from(const Doc& root) {
    LogisticModel m = zero_logistic_model(root.at("n_classes").int32(), root.at("feature_names").strings());
    const Doc p = root.at("params");
    m.config.learning_rate = p.at("learning_rate").number();
    m.config.max_iters = p.at("max_iters").int32();
    m.config.l2 = p.at("l2").number();
    m.config.seed = p.at("seed").uint64();
    m.config.tolerance = p.at("tolerance").number();
    m.config.standardize = p.at("standardize").boolean();
    m.training_log.iterations = root.at("iterations").int32();
    m.training_log.final_log_likelihood = root.at("final_log_likelihood").number();
    const auto w = root.at("weights").items();
    if (w.size() != m.weights.size()) root.at("weights").fail("weight count does not match n_classes x (n_features + 1)");
    for (std::size_t i = 0; i < w.size(); ++i) m.weights[i] = w[i].number();
    return m;
}

} // namespace

std::string model_to_json(const Model& model) {
    if (const auto* rf = std::get_if<RandomForestModel>(&model)) return dump(forest_json(*rf));
    return dump(logistic_json(std::get<LogisticModel>(model)));
}

Model parse_model(std::string_view text, const std::string& source) {
    const json j = parse_json(text, source);
    const Doc root(j, source);
    root.check_format("model_format", kFormatVersion);
    const Doc algo = root.at("algo");
    const std::string name = algo.string();
    if (name == "rf") return forest_from(root);
    if (name == "mlr") return logistic_from(root);
    algo.fail("unknown algorithm '" + name + "'");
}

Model read_model(const std::filesystem::path& path) { return parse_model(read_text(path), path.string()); }

} // namespace wayfind::io
