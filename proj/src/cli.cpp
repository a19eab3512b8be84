#include "gbeam/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gbeam/error.hpp"
#include "gbeam/format.hpp"
#include "gbeam/paraxial.hpp"
#include "gbeam/validate.hpp"

namespace gbeam::cli {

namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::Config, where + ": " + what);
}

// Walks one JSON object, remembering which keys were read so that anything
// left over is reported as unknown.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) config_error(where_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) config_error(where_, "missing field '" + key + "'");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) config_error(at(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) config_error(at(key), "must be finite");
        return x;
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) config_error(at(key), "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) config_error(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) config_error(at(key), "expected an array of numbers");
        std::vector<double> out;
        for (const json& x : v) {
            if (!x.is_number()) config_error(at(key), "expected an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::string at(const std::string& key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.contains(key)) config_error(where_, "unknown field '" + key + "'");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

DepthInterval parse_domain(Fields& f) {
    if (!f.has("domain")) return {};
    const json& d = f.raw("domain");
    if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number()) {
        config_error(f.at("domain"), "expected [lo, hi]");
    }
    return {d[0].get<double>(), d[1].get<double>()};
}

SoundSpeedProfile parse_profile(const json& j, const std::filesystem::path& base_dir) {
    Fields f(j, "profile");
    const std::string type = f.string("type");
    std::optional<SoundSpeedProfile> p;
    if (type == "constant") {
        const double c0 = f.number("c0");
        p = SoundSpeedProfile::constant(c0, parse_domain(f));
    } else if (type == "linear") {
        const double c0 = f.number("c0"), g = f.number("gradient");
        p = SoundSpeedProfile::linear(c0, g, parse_domain(f));
    } else if (type == "munk") {
        const double c0 = f.number("c0"), eps = f.number("epsilon"), axis = f.number("axis"), w = f.number("scale");
        p = SoundSpeedProfile::munk(c0, eps, axis, w, parse_domain(f));
    } else if (type == "cosh" || type == "sinh" || type == "cos" || type == "sin") {
        const double c0 = f.number("c0"), axis = f.number("axis"), w = f.number("scale");
        const DepthInterval dom = parse_domain(f);
        if (type == "cosh") p = SoundSpeedProfile::cosh_duct(c0, axis, w, dom);
        if (type == "sinh") p = SoundSpeedProfile::sinh_profile(c0, axis, w, dom);
        if (type == "cos") p = SoundSpeedProfile::cos_profile(c0, axis, w, dom);
        if (type == "sin") p = SoundSpeedProfile::sin_profile(c0, axis, w, dom);
    } else if (type == "tabulated") {
        p = SoundSpeedProfile::tabulated(f.numbers("depths"), f.numbers("speeds"));
    } else if (type == "csv") {
        std::filesystem::path file = f.string("path");
        if (file.is_relative()) file = base_dir / file;
        p = SoundSpeedProfile::from_csv(file);
    } else {
        config_error(f.at("type"), "unknown profile type '" + type + "'");
    }
    if (f.has("density")) {
        const json& d = f.raw("density");
        if (d.is_number()) {
            p = p->with_density(Density(d.get<double>()));
        } else {
            Fields df(d, "profile.density");
            p = p->with_density(Density(df.numbers("depths"), df.numbers("values")));
            df.finish();
        }
    }
    f.finish();
    return *p;
}

std::vector<double> parse_angles(const json& j) {
    std::vector<double> deg;
    if (j.is_array()) {
        for (const json& x : j) {
            if (!x.is_number()) config_error("angles_deg", "expected numbers");
            deg.push_back(x.get<double>());
        }
    } else {
        Fields f(j, "angles_deg");
        const double start = f.number("start"), stop = f.number("stop");
        const json& n = f.raw("count");
        if (!n.is_number_integer() || n.get<long>() < 1) config_error("angles_deg.count", "expected a positive integer");
        const long count = n.get<long>();
        f.finish();
        for (long i = 0; i < count; ++i) deg.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
    }
    if (deg.empty()) config_error("angles_deg", "the angle fan is empty");
    std::vector<double> rad;
    for (double d : deg) {
        if (!std::isfinite(d) || std::abs(d) >= 90.0) config_error("angles_deg", "angles must lie in (-90, 90)");
        rad.push_back(d * kDeg);
    }
    std::sort(rad.begin(), rad.end());
    rad.erase(std::unique(rad.begin(), rad.end()), rad.end());
    return rad;
}

Horizon parse_horizon(const json& j) {
    Fields f(j, "horizon");
    const std::string kind = f.string("kind");
    const double value = f.number("value");
    f.finish();
    if (!(value > 0.0)) config_error("horizon.value", "must be positive");
    if (kind == "time") return Horizon::time(value);
    if (kind == "arclength") return Horizon::arclength(value);
    if (kind == "range") return Horizon::range(value);
    config_error("horizon.kind", "expected time, arclength or range");
}

const std::set<std::string> kOutputs{"rays", "svg", "spread", "caustics", "cz", "beam", "report"};

}  // namespace

Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, std::string("scenario is not valid JSON: ") + e.what());
    }
    Fields f(j, "scenario");
    const json& version = f.raw("version");
    if (!version.is_number_integer() || version.get<long>() != 1) config_error("version", "expected 1");

    Scenario s;
    try {
        s.profile = parse_profile(f.raw("profile"), base_dir);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        throw Error(ErrorCode::Config, std::string("profile: ") + e.what());
    }

    Fields src(f.raw("source"), "source");
    s.r0 = src.number("r0", 0.0);
    s.z0 = src.number("z0");
    src.finish();
    if (!s.profile.domain().contains(s.z0)) config_error("source.z0", "outside the profile's valid depth interval");

    s.angles = parse_angles(f.raw("angles_deg"));
    s.horizon = parse_horizon(f.raw("horizon"));
    s.options.step = f.number("step", kDefaultStep);
    if (!(s.options.step > 0.0)) config_error("step", "must be positive");
    s.options.max_time = f.number("max_time", s.options.max_time);
    if (!(s.options.max_time > 0.0)) config_error("max_time", "must be positive");

    if (f.has("beam")) {
        Fields b(f.raw("beam"), "beam");
        s.beam.frequency = b.number("frequency", s.beam.frequency);
        s.beam.source_level = b.number("source_level", s.beam.source_level);
        s.beam.include_density = b.boolean("include_density", s.beam.include_density);
        if (b.has("offsets")) s.offsets = b.numbers("offsets");
        b.finish();
        try {
            s.beam.validate();
        } catch (const Error& e) {
            throw Error(ErrorCode::Config, std::string("beam: ") + e.what());
        }
        if (s.offsets.empty()) config_error("beam.offsets", "expected at least one offset");
    }

    if (f.has("outputs")) {
        const json& o = f.raw("outputs");
        if (!o.is_array()) config_error("outputs", "expected an array of names");
        for (const json& x : o) {
            if (!x.is_string() || !kOutputs.contains(x.get<std::string>())) {
                config_error("outputs", "unknown output " + x.dump());
            }
            s.outputs.insert(x.get<std::string>());
        }
    }
    if (f.has("out_dir")) {
        s.out_dir = f.string("out_dir");
        if (s.out_dir.is_relative()) s.out_dir = base_dir / s.out_dir;
    }
    f.finish();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "cannot read scenario " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

namespace {

struct RayResult {
    RayPath path;
    std::vector<ExtrinsicSpreading> ext;
    std::vector<IntrinsicSpreading> jac;
    std::vector<CausticEvent> caustics;
};

// Runs job(i) for i in [0, n) on up to `threads` workers. Results land in
// caller-owned slots, so output order never depends on completion order. The
// first failure in index order is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<RayResult> trace_fan_rays(const Scenario& sc, unsigned threads, bool extrinsic) {
    std::vector<RayResult> out(sc.angles.size());
    parallel_for(sc.angles.size(), threads, [&](std::size_t i) {
        RayResult& r = out[i];
        r.path = trace(sc.profile, sc.r0, sc.z0, sc.angles[i], sc.horizon, sc.options);
        r.jac = propagate_jacobi(sc.profile, r.path);
        if (extrinsic) r.ext = propagate_extrinsic(sc.profile, r.path);
        r.caustics = detect_caustics(r.jac, r.path);
    });
    return out;
}

class Outputs {
public:
    explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(ErrorCode::Io, "cannot create " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const auto file = dir_ / name;
        std::ofstream out(file, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
        body(out);
        if (!out) throw Error(ErrorCode::Io, "failed writing " + file.string());
        files_.push_back(name);
    }

    void manifest(std::string_view subcommand, const std::optional<std::string>& timestamp) {
        std::vector<std::string> listed = files_;
        write("manifest.txt", [&](std::ostream& o) {
            o << "gbeam " << subcommand << '\n';
            if (timestamp) o << "timestamp " << *timestamp << '\n';
            for (const auto& f : listed) o << f << '\n';
        });
    }

    const std::filesystem::path& dir() const { return dir_; }
    std::size_t count() const { return files_.size(); }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

void write_rays(std::ostream& o, const std::vector<RayResult>& rays) {
    o << "theta0,t,s,r,z,theta,c\n";
    for (const RayResult& r : rays) {
        for (const RaySample& s : r.path) {
            o << fmt17(r.path.launch_angle()) << ',' << fmt17(s.state.t) << ',' << fmt17(s.state.s) << ','
              << fmt17(s.state.r) << ',' << fmt17(s.state.z) << ',' << fmt17(s.state.elevation()) << ','
              << fmt17(s.ssp.c) << '\n';
        }
    }
}

std::string svg_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// Range across, depth down. At most ~2000 vertices per polyline.
void write_svg(std::ostream& o, const std::vector<RayResult>& rays, const std::string& title) {
    constexpr double width = 960, height = 540, margin = 50;
    double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin, zmin = rmin, zmax = -rmin;
    for (const RayResult& r : rays) {
        for (const RaySample& s : r.path) {
            rmin = std::min(rmin, s.state.r);
            rmax = std::max(rmax, s.state.r);
            zmin = std::min(zmin, s.state.z);
            zmax = std::max(zmax, s.state.z);
        }
    }
    if (!(rmax > rmin)) rmax = rmin + 1;
    if (!(zmax > zmin)) zmax = zmin + 1;
    const double sx = (width - 2 * margin) / (rmax - rmin);
    const double sy = (height - 2 * margin) / (zmax - zmin);
    auto x = [&](double r) { return svg_number(margin + (r - rmin) * sx); };
    auto y = [&](double z) { return svg_number(margin + (z - zmin) * sy); };

    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << margin << "\" y=\"30\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    o << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin << "\" height=\""
      << height - 2 * margin << "\" fill=\"none\" stroke=\"#888\"/>\n";
    o << "<text x=\"" << margin << "\" y=\"" << height - 15 << "\" font-family=\"sans-serif\" font-size=\"11\">range "
      << svg_number(rmin / 1000) << " to " << svg_number(rmax / 1000) << " km; depth " << svg_number(zmin) << " to "
      << svg_number(zmax) << " m (down)</text>\n";
    for (const RayResult& r : rays) {
        const std::size_t stride = std::max<std::size_t>(1, r.path.size() / 2000);
        o << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"0.8\" points=\"";
        for (std::size_t k = 0; k < r.path.size(); k += stride) {
            o << x(r.path[k].state.r) << ',' << y(r.path[k].state.z) << ' ';
        }
        o << x(r.path.back().state.r) << ',' << y(r.path.back().state.z) << "\"/>\n";
    }
    for (const RayResult& r : rays) {
        for (const CausticEvent& c : r.caustics) {
            o << "<circle cx=\"" << x(c.r) << "\" cy=\"" << y(c.z) << "\" r=\"2.5\" fill=\"#c0392b\"/>\n";
        }
    }
    o << "</svg>\n";
}

void write_spread(std::ostream& o, const std::vector<RayResult>& rays) {
    o << "theta0,t,s,r,z,q,p,ain,ain_dot\n";
    for (const RayResult& r : rays) {
        for (std::size_t k = 0; k < r.path.size(); ++k) {
            const RayState& s = r.path[k].state;
            o << fmt17(r.path.launch_angle()) << ',' << fmt17(s.t) << ',' << fmt17(s.s) << ',' << fmt17(s.r) << ','
              << fmt17(s.z) << ',' << fmt17(r.ext[k].q) << ',' << fmt17(r.ext[k].p) << ',' << fmt17(r.jac[k].ain)
              << ',' << fmt17(r.jac[k].ain_dot) << '\n';
        }
    }
}

void write_caustics(std::ostream& o, const std::vector<RayResult>& rays) {
    o << "theta0,index,t,s,r,z\n";
    for (const RayResult& r : rays) {
        for (const CausticEvent& c : r.caustics) {
            o << fmt17(r.path.launch_angle()) << ',' << c.index << ',' << fmt17(c.t) << ',' << fmt17(c.s) << ','
              << fmt17(c.r) << ',' << fmt17(c.z) << '\n';
        }
    }
}

// Predicted spacing: the exact duct value when the profile has one, else the
// local estimate at the source. Empty where the curvature is not positive.
std::optional<double> predicted_spacing(const Scenario& sc) {
    try {
        const CzDistance cz = cz_distance(sc.profile, sc.z0);
        return cz.exact ? *cz.exact : cz.half_wavelength;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NonPositiveCurvature) return std::nullopt;
        throw;
    }
}

void write_cz_table(std::ostream& o, const std::vector<RayResult>& rays, std::optional<double> predicted) {
    o << "theta0,caustics,first_r,mean_spacing,predicted,rel_diff\n";
    for (const RayResult& r : rays) {
        o << fmt17(r.path.launch_angle()) << ',' << r.caustics.size() << ',';
        if (!r.caustics.empty()) o << fmt17(r.caustics.front().r);
        o << ',';
        std::optional<double> mean;
        if (r.caustics.size() >= 2) mean = (r.caustics.back().r - r.caustics.front().r) / (r.caustics.size() - 1);
        if (mean) o << fmt17(*mean);
        o << ',';
        if (predicted) o << fmt17(*predicted);
        o << ',';
        if (mean && predicted) o << fmt17((*mean - *predicted) / *predicted);
        o << '\n';
    }
}

std::string beam_file(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "beam_%03zu.csv", i);
    return buf;
}

void print_czdist(std::ostream& out, const Scenario& sc) {
    const SspEval e = sc.profile.eval(sc.z0);
    const double k = sc.profile.curvature(sc.z0);
    out << "profile " << sc.profile.name() << " at z0 = " << fmt17(sc.z0) << " m\n";
    out << "c = " << fmt17(e.c) << " m/s, c'' = " << fmt17(e.d2c) << " 1/(m s), K = " << fmt17(k) << " 1/s^2 ("
        << to_string(classify(sc.profile, sc.z0)) << ")\n";
    if (!(k > 0.0)) {
        out << "no convergence zones: K <= 0 at the source\n";
        return;
    }
    const CzDistance cz = cz_distance(sc.profile, sc.z0);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.2f km", cz.half_wavelength / 1000);
    out << "caustic spacing pi c K^(-1/2): " << buf << " (" << fmt17(cz.half_wavelength) << " m)\n";
    if (cz.crude) {
        std::snprintf(buf, sizeof buf, "%.2f km", *cz.crude / 1000);
        out << "caustic spacing pi (c/c'')^(1/2): " << buf << " (" << fmt17(*cz.crude) << " m)\n";
    }
    if (cz.exact) {
        std::snprintf(buf, sizeof buf, "%.2f km", *cz.exact / 1000);
        out << "exact refocusing distance pi W: " << buf << " (" << fmt17(*cz.exact) << " m)\n";
    }
}

int run_validate(const Scenario& sc, const RunOptions& opt, Outputs& files, std::ostream& out) {
    // One suite call per angle; each call repeats the source-curvature item, so
    // only the first keeps it.
    std::vector<std::vector<OracleReport>> parts(sc.angles.size());
    parallel_for(sc.angles.size(), opt.threads, [&](std::size_t i) {
        parts[i] = identity_suite(sc.profile, sc.z0, {sc.angles[i]}, sc.horizon, sc.options);
    });
    std::vector<OracleReport> reports;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        reports.insert(reports.end(), parts[i].begin() + (i == 0 ? 0 : 1), parts[i].end());
    }
    if (sc.wants("report")) files.write("report.json", [&](std::ostream& o) { o << reports_to_json(reports); });
    out << reports_to_table(reports);
    const auto failed = std::count_if(reports.begin(), reports.end(), [](const OracleReport& r) { return !r.pass; });
    out << reports.size() - failed << " of " << reports.size() << " checks pass\n";
    return failed == 0 ? kExitOk : kExitValidation;
}

int dispatch(std::string_view cmd, const Scenario& sc, const RunOptions& opt, std::ostream& out) {
    if (cmd == "czdist") {
        print_czdist(out, sc);
        return kExitOk;
    }
    Outputs files(opt.out_dir ? *opt.out_dir : sc.out_dir);
    int status = kExitOk;
    if (cmd == "trace") {
        const auto rays = trace_fan_rays(sc, opt.threads, false);
        if (sc.wants("rays")) files.write("rays.csv", [&](std::ostream& o) { write_rays(o, rays); });
        if (sc.wants("svg")) {
            files.write("fan.svg", [&](std::ostream& o) { write_svg(o, rays, sc.profile.name() + " ray fan"); });
        }
    } else if (cmd == "spread") {
        const auto rays = trace_fan_rays(sc, opt.threads, true);
        if (sc.wants("spread")) files.write("spread.csv", [&](std::ostream& o) { write_spread(o, rays); });
    } else if (cmd == "caustics") {
        const auto rays = trace_fan_rays(sc, opt.threads, false);
        if (sc.wants("caustics")) files.write("caustics.csv", [&](std::ostream& o) { write_caustics(o, rays); });
        if (sc.wants("cz")) {
            const auto predicted = predicted_spacing(sc);
            files.write("cz.csv", [&](std::ostream& o) { write_cz_table(o, rays, predicted); });
        }
    } else if (cmd == "beam") {
        const auto rays = trace_fan_rays(sc, opt.threads, true);
        std::vector<BeamField> fields(rays.size());
        parallel_for(rays.size(), opt.threads, [&](std::size_t i) {
            fields[i] = beam_field(rays[i].path, rays[i].ext, rays[i].jac, sc.beam, sc.offsets);
        });
        if (sc.wants("beam")) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                files.write(beam_file(i), [&](std::ostream& o) { write_csv(o, fields[i]); });
            }
        }
    } else if (cmd == "validate") {
        status = run_validate(sc, opt, files, out);
    } else {
        throw Error(ErrorCode::Config, "unknown subcommand '" + std::string(cmd) + "'");
    }
    files.manifest(cmd, opt.timestamp);
    if (cmd != "validate") out << "wrote " << files.count() << " files to " << files.dir().string() << '\n';
    return status;
}

}  // namespace

int run(std::string_view subcommand, const Scenario& scenario, const RunOptions& options, std::ostream& out,
        std::ostream& err) {
    try {
        return dispatch(subcommand, scenario, options, out);
    } catch (const Error& e) {
        err << "gbeam " << subcommand << ": " << e.what() << '\n';
        const bool config = e.code() == ErrorCode::Config || e.code() == ErrorCode::InvalidArgument;
        return config ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        err << "gbeam " << subcommand << ": " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace gbeam::cli
