#include "evflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace evflow {

namespace {

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) throw FileError("cannot open " + path);
    return f;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw FileError("cannot write " + path);
    return f;
}

template <typename T>
void put(std::ofstream& f, const T& value) {
    f.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& f, const std::string& path) {
    T value;
    f.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!f) throw ParseError("truncated file: " + path);
    return value;
}

std::vector<double> parse_csv_line(const std::string& line, std::size_t expected,
                                   const std::string& path, std::size_t lineno) {
    std::vector<double> out;
    out.reserve(expected);
    const char* p = line.c_str();
    while (true) {
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p)
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad number near '" +
                             std::string(p).substr(0, 12) + "'");
        out.push_back(v);
        p = end;
        while (*p == ' ' || *p == '\t') ++p;
        if (*p == ',') {
            ++p;
            continue;
        }
        if (*p == '\0' || *p == '\r') break;
        throw ParseError(path + ":" + std::to_string(lineno) + ": unexpected character '" +
                         std::string(1, *p) + "'");
    }
    if (out.size() != expected)
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(expected) + " fields, got " + std::to_string(out.size()));
    return out;
}

void expect_header(std::ifstream& f, const std::string& expected, const std::string& path) {
    std::string line;
    if (!std::getline(f, line)) throw ParseError(path + ": empty file");
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != expected)
        throw ParseError(path + ":1: expected header '" + expected + "', got '" + line + "'");
}

// Fixed formatting keeps repeated runs byte-identical. %.12g round-trips
// timestamps at sub-ns resolution; %.9g round-trips f32-valued columns.
std::string fmt(double v, const char* spec = "%.9g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

constexpr char kEvtMagic[4] = {'E', 'V', 'T', '1'};
constexpr char kModelMagic[4] = {'N', 'F', 'M', '1'};
constexpr char kEncMagic[4] = {'V', 'K', 'M', '1'};

} // namespace

void write_events_evt1(const std::string& path, const EventCloud& cloud) {
    auto f = open_out(path, true);
    f.write(kEvtMagic, 4);
    put<std::uint64_t>(f, cloud.size());
    for (const Event& e : cloud.events) {
        put<double>(f, e.t);
        put<float>(f, static_cast<float>(e.x));
        put<float>(f, static_cast<float>(e.y));
        put<std::int8_t>(f, e.polarity);
    }
    if (!f) throw FileError("short write to " + path);
}

EventCloud read_events_evt1(const std::string& path) {
    auto f = open_in(path, true);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kEvtMagic, 4) != 0)
        throw ParseError(path + ": missing EVT1 magic");
    const auto n = get<std::uint64_t>(f, path);
    EventCloud cloud;
    cloud.events.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Event e;
        e.t = get<double>(f, path);
        e.x = get<float>(f, path);
        e.y = get<float>(f, path);
        e.polarity = get<std::int8_t>(f, path);
        cloud.events.push_back(e);
    }
    return cloud;
}

void write_events_csv(const std::string& path, const EventCloud& cloud) {
    auto f = open_out(path);
    f << "t,x,y,p\n";
    for (const Event& e : cloud.events)
        f << fmt(e.t, "%.12g") << "," << fmt(e.x) << "," << fmt(e.y) << ","
          << static_cast<int>(e.polarity) << "\n";
}

EventCloud read_events_csv(const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "t,x,y,p", path);
    EventCloud cloud;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto v = parse_csv_line(line, 4, path, lineno);
        cloud.events.push_back(
            Event{v[0], v[1], v[2], static_cast<std::int8_t>(v[3] < 0 ? -1 : 1)});
    }
    return cloud;
}

EventCloud read_events_auto(const std::string& path) {
    {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) throw FileError("cannot open " + path);
        char magic[4] = {0, 0, 0, 0};
        probe.read(magic, 4);
        if (probe && std::memcmp(magic, kEvtMagic, 4) == 0) return read_events_evt1(path);
    }
    return read_events_csv(path);
}

void write_flow_csv(const std::string& path, const EventCloud& cloud,
                    const std::vector<Vec2>& flows) {
    if (cloud.size() != flows.size())
        throw LengthMismatch("events/flows differ in length");
    auto f = open_out(path);
    f << "t,x,y,ux,uy\n";
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const Event& e = cloud.events[i];
        f << fmt(e.t, "%.12g") << "," << fmt(e.x) << "," << fmt(e.y) << ","
          << fmt(flows[i].x()) << "," << fmt(flows[i].y()) << "\n";
    }
}

FlowRows read_flow_csv(const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "t,x,y,ux,uy", path);
    FlowRows rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto v = parse_csv_line(line, 5, path, lineno);
        rows.t.push_back(v[0]);
        rows.xy.emplace_back(v[1], v[2]);
        rows.u.emplace_back(v[3], v[4]);
    }
    return rows;
}

void write_gt_csv(const std::string& path, const SimResult& sim) {
    auto f = open_out(path);
    f << "t,x,y,ux,uy,nx,ny,Z\n";
    for (std::size_t i = 0; i < sim.cloud.size(); ++i) {
        const Event& e = sim.cloud.events[i];
        f << fmt(e.t, "%.12g") << "," << fmt(e.x) << "," << fmt(e.y) << ","
          << fmt(sim.flow[i].x()) << "," << fmt(sim.flow[i].y()) << ","
          << fmt(sim.normal_flow[i].x()) << "," << fmt(sim.normal_flow[i].y()) << ","
          << fmt(sim.depth[i]) << "\n";
    }
}

GtRows read_gt_csv(const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "t,x,y,ux,uy,nx,ny,Z", path);
    GtRows rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto v = parse_csv_line(line, 8, path, lineno);
        rows.t.push_back(v[0]);
        rows.xy.emplace_back(v[1], v[2]);
        rows.u.emplace_back(v[3], v[4]);
        rows.n.emplace_back(v[5], v[6]);
        rows.z.push_back(v[7]);
    }
    return rows;
}

CameraModel read_camera_file(const std::string& path) {
    auto f = open_in(path);
    CameraModel cam;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
        const double value = std::strtod(line.c_str() + eq + 1, nullptr);
        if (key == "fx") cam.fx = value;
        else if (key == "fy") cam.fy = value;
        else if (key == "cx") cam.cx = value;
        else if (key == "cy") cam.cy = value;
        else if (key == "k1") cam.k1 = value;
        else if (key == "k2") cam.k2 = value;
        else if (key == "k3") cam.k3 = value;
        else if (key == "p1") cam.p1 = value;
        else if (key == "p2") cam.p2 = value;
        else if (key == "width") cam.width = static_cast<int>(value);
        else if (key == "height") cam.height = static_cast<int>(value);
        else
            throw ParseError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (cam.fx <= 0.0 || cam.fy <= 0.0 || cam.width <= 0 || cam.height <= 0)
        throw ParseError(path + ": fx, fy, width, height must be positive");
    return cam;
}

void write_camera_file(const std::string& path, const CameraModel& cam) {
    auto f = open_out(path);
    f << "fx=" << fmt(cam.fx) << "\nfy=" << fmt(cam.fy) << "\ncx=" << fmt(cam.cx)
      << "\ncy=" << fmt(cam.cy) << "\nk1=" << fmt(cam.k1) << "\nk2=" << fmt(cam.k2)
      << "\nk3=" << fmt(cam.k3) << "\np1=" << fmt(cam.p1) << "\np2=" << fmt(cam.p2)
      << "\nwidth=" << cam.width << "\nheight=" << cam.height << "\n";
}

std::vector<SceneEdge> read_scene_file(const std::string& path) {
    auto f = open_in(path);
    std::vector<SceneEdge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        SceneEdge e;
        if (!(ss >> e.p0.x())) continue;   // blank line
        if (!(ss >> e.p0.y() >> e.p1.x() >> e.p1.y() >> e.depth >> e.events_per_length))
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected 'x0 y0 x1 y1 depth density'");
        if (e.depth <= 0.0)
            throw ParseError(path + ":" + std::to_string(lineno) + ": depth must be > 0");
        if ((e.p1 - e.p0).norm() == 0.0)
            throw ParseError(path + ":" + std::to_string(lineno) + ": zero-length edge");
        edges.push_back(e);
    }
    return edges;
}

ImuSamples read_imu_csv(const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "t,wx,wy,wz", path);
    ImuSamples imu;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto v = parse_csv_line(line, 4, path, lineno);
        imu.t.push_back(v[0]);
        imu.w.emplace_back(v[1], v[2], v[3]);
    }
    if (imu.t.empty()) throw ParseError(path + ": no IMU samples");
    return imu;
}

void write_imu_csv(const std::string& path, const ImuSamples& samples) {
    auto f = open_out(path);
    f << "t,wx,wy,wz\n";
    for (std::size_t i = 0; i < samples.t.size(); ++i)
        f << fmt(samples.t[i], "%.12g") << "," << fmt(samples.w[i].x()) << ","
          << fmt(samples.w[i].y()) << "," << fmt(samples.w[i].z()) << "\n";
}

Vec3 imu_window_mean(const ImuSamples& samples, double t0, double t1) {
    if (samples.t.empty()) throw EmptyInput("no IMU samples");
    if (t1 <= t0) throw OutOfRange("imu window must have t1 > t0");
    const auto value_at = [&](double t) -> Vec3 {
        if (t <= samples.t.front()) return samples.w.front();
        if (t >= samples.t.back()) return samples.w.back();
        const auto hi = std::lower_bound(samples.t.begin(), samples.t.end(), t);
        const auto i1 = static_cast<std::size_t>(hi - samples.t.begin());
        const std::size_t i0 = i1 - 1;
        const double a = (t - samples.t[i0]) / (samples.t[i1] - samples.t[i0]);
        return (1.0 - a) * samples.w[i0] + a * samples.w[i1];
    };
    // Trapezoidal integration over the window with interpolated endpoints.
    std::vector<double> knots{t0};
    for (const double t : samples.t)
        if (t > t0 && t < t1) knots.push_back(t);
    knots.push_back(t1);
    Vec3 acc = Vec3::Zero();
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double h = knots[i + 1] - knots[i];
        acc += 0.5 * h * (value_at(knots[i]) + value_at(knots[i + 1]));
    }
    return acc / (t1 - t0);
}

void write_predictions_csv(const std::string& path, const EventCloud& cloud,
                           const std::vector<NormalFlowPrediction>& preds) {
    if (cloud.size() != preds.size())
        throw LengthMismatch("events/predictions differ in length");
    auto f = open_out(path);
    f << "t,x,y,nx,ny,sigma,valid\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const Event& e = cloud.events[i];
        const auto& p = preds[i];
        f << fmt(e.t, "%.12g") << "," << fmt(e.x) << "," << fmt(e.y) << ","
          << fmt(p.n_hat.x()) << "," << fmt(p.n_hat.y()) << ","
          << fmt(p.sigma) << "," << (p.valid ? 1 : 0) << "\n";
    }
}

PredictionRows read_predictions_csv(const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "t,x,y,nx,ny,sigma,valid", path);
    PredictionRows rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto v = parse_csv_line(line, 7, path, lineno);
        rows.t.push_back(v[0]);
        rows.xy.emplace_back(v[1], v[2]);
        rows.n.emplace_back(v[3], v[4]);
        rows.sigma.push_back(v[5]);
        rows.valid.push_back(v[6] != 0.0);
    }
    return rows;
}

void write_egomotion_csv(const std::string& path, const std::vector<EgoRow>& rows) {
    auto f = open_out(path);
    f << "t_start,t_end,vx,vy,vz,inlier_fraction\n";
    for (const auto& r : rows)
        f << fmt(r.t_start, "%.12g") << "," << fmt(r.t_end, "%.12g") << ","
          << fmt(r.v.x()) << "," << fmt(r.v.y()) << "," << fmt(r.v.z()) << ","
          << fmt(r.inlier_fraction) << "\n";
}

std::vector<EgoRow> read_egomotion_csv(const std::string& path) {
    auto f = open_in(path);
    expect_header(f, "t_start,t_end,vx,vy,vz,inlier_fraction", path);
    std::vector<EgoRow> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto v = parse_csv_line(line, 6, path, lineno);
        rows.push_back(EgoRow{v[0], v[1], Vec3(v[2], v[3], v[4]), v[5]});
    }
    return rows;
}

void write_model(const std::string& path, const TrainedModel& model) {
    auto f = open_out(path, true);
    f.write(kModelMagic, 4);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(model.d));
    put<std::uint64_t>(f, model.projection_seed);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(model.mlp.layers.size()));
    for (const auto& layer : model.mlp.layers) {
        put<std::uint32_t>(f, static_cast<std::uint32_t>(layer.w.rows()));
        put<std::uint32_t>(f, static_cast<std::uint32_t>(layer.w.cols()));
        for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
                put<float>(f, layer.w(r, c));
        for (Eigen::Index r = 0; r < layer.b.size(); ++r)
            put<float>(f, layer.b(r));
    }
    if (!f) throw FileError("short write to " + path);
}

TrainedModel read_model(const std::string& path) {
    auto f = open_in(path, true);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kModelMagic, 4) != 0)
        throw ParseError(path + ": missing NFM1 magic");
    TrainedModel model;
    model.d = static_cast<int>(get<std::uint32_t>(f, path));
    model.projection_seed = get<std::uint64_t>(f, path);
    const auto layers = get<std::uint32_t>(f, path);
    for (std::uint32_t l = 0; l < layers; ++l) {
        const auto rows = get<std::uint32_t>(f, path);
        const auto cols = get<std::uint32_t>(f, path);
        MlpParams::Layer layer;
        layer.w.resize(rows, cols);
        for (std::uint32_t r = 0; r < rows; ++r)
            for (std::uint32_t c = 0; c < cols; ++c)
                layer.w(r, c) = get<float>(f, path);
        layer.b.resize(rows);
        for (std::uint32_t r = 0; r < rows; ++r) layer.b(r) = get<float>(f, path);
        model.mlp.layers.push_back(std::move(layer));
    }
    return model;
}

void write_encoding_vkm1(const std::string& path, const Encoding& enc) {
    auto f = open_out(path, true);
    f.write(kEncMagic, 4);
    put<std::uint64_t>(f, enc.n);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(enc.d));
    const std::size_t total = enc.n * static_cast<std::size_t>(enc.d);
    for (std::size_t i = 0; i < total; ++i) {
        put<float>(f, static_cast<float>(enc.re[i]));
        put<float>(f, static_cast<float>(enc.im[i]));
    }
    if (!f) throw FileError("short write to " + path);
}

Encoding read_encoding_vkm1(const std::string& path) {
    auto f = open_in(path, true);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kEncMagic, 4) != 0)
        throw ParseError(path + ": missing VKM1 magic");
    Encoding enc;
    enc.n = get<std::uint64_t>(f, path);
    enc.d = static_cast<int>(get<std::uint32_t>(f, path));
    const std::size_t total = enc.n * static_cast<std::size_t>(enc.d);
    enc.re.resize(total);
    enc.im.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        enc.re[i] = get<float>(f, path);
        enc.im[i] = get<float>(f, path);
    }
    return enc;
}

} // namespace evflow
