#pragma once

#include "surfmean/surfmean.hpp"
#include "surfmean/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace surfmean::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitDegenerate = 4;

inline int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::all_degenerate:
    case ErrorCode::degenerate_jacobian:
    case ErrorCode::degenerate_area:
        return kExitDegenerate;
    default:
        return kExitInvalid;
    }
}

using json = nlohmann::json;

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline RepKind parse_rep(const std::string& s)
{
    if (s == "srnf") {
        return RepKind::srnf;
    }
    if (s == "rpsn") {
        return RepKind::rpsn;
    }
    throw Error(ErrorCode::invalid_grid, "unknown representation '" + s + "'");
}

inline synth::Family parse_family(const std::string& s)
{
    if (s == "plane") return synth::Family::plane;
    if (s == "sphere") return synth::Family::sphere;
    if (s == "torus") return synth::Family::torus;
    if (s == "bumpy_torus") return synth::Family::bumpy_torus;
    throw Error(ErrorCode::invalid_grid, "unknown surface family '" + s + "'");
}

inline Vec3 to_vec3(const std::vector<double>& v) { return v.empty() ? Vec3::Zero() : Vec3(v[0], v[1], v[2]); }

class Clock {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

/// Write a report to `path`, or to `out` when the path is empty.
inline void emit(const json& report, const std::string& path, std::ostream& out)
{
    const std::string text = report.dump(2) + "\n";
    if (path.empty()) {
        out << text;
        return;
    }
    auto f = open_output(path);
    f << text;
    finish_output(f, path);
}

struct GenArgs {
    std::string family = "torus";
    int nu = 64, nv = 64;
    double radius = 1.0, major = 2.0, minor = 0.5, bump_amplitude = 0.05;
    int bump_frequency = 3;
    std::vector<double> offset;
    std::uint64_t seed = 1;
    double warp_amplitude = 0.0;
    std::uint64_t warp_seed = 1;
    std::string output, obj;
};

struct RegisterArgs {
    std::string rep = "rpsn", reference, moving, output, resampled, report;
    int max_iters = 500;
    double tol = 1e-8, step = 0.0, sobolev = 0.01;
    int smoothing = 1;
    bool no_smooth = false;
    std::vector<double> origin;
};

struct MeanArgs {
    std::string rep = "rpsn", output, report;
    std::vector<std::string> inputs;
    int centroid_iters = 10, reference = 0, max_iters = 500;
    double tol = 1e-8, sobolev = 0.01;
    bool remove_translations = false, no_register = false, no_smooth = false;
};

inline int run_gen(const GenArgs& a, std::ostream&)
{
    synth::SurfaceSpec spec;
    spec.family = parse_family(a.family);
    spec.nu = a.nu;
    spec.nv = a.nv;
    spec.radius = a.radius;
    spec.major_radius = a.major;
    spec.minor_radius = a.minor;
    spec.bump_amplitude = a.bump_amplitude;
    spec.bump_frequency = a.bump_frequency;
    spec.offset = to_vec3(a.offset);
    spec.seed = a.seed;
    SurfaceGrid grid = synth::generate(spec);
    if (a.warp_amplitude > 0.0) {
        const auto gamma = synth::random_smooth_diffeo(synth::meta_of(spec), a.warp_amplitude, a.warp_seed);
        grid = synth::generate_reparameterized(spec, gamma);
    }
    write_sgrid(grid, a.output);
    if (!a.obj.empty()) {
        export_obj(grid, a.obj);
    }
    return kExitOk;
}

inline int run_geom(const std::string& input, const std::vector<double>& origin, std::ostream& out)
{
    const SampledSurface s = SampledSurface::from(read_sgrid(input));
    const GeometryCache& c = s.cache;
    double gmin[2] = {1e300, 1e300}, gmax[2] = {-1e300, -1e300};
    double nmin = 1e300;
    for (std::size_t k = 0; k < c.meta.size(); ++k) {
        if (!c.valid[k]) {
            continue;
        }
        gmin[0] = std::min(gmin[0], c.gamma_u[k]);
        gmax[0] = std::max(gmax[0], c.gamma_u[k]);
        gmin[1] = std::min(gmin[1], c.gamma_v[k]);
        gmax[1] = std::max(gmax[1], c.gamma_v[k]);
        nmin = std::min(nmin, c.normN[k]);
    }
    json r;
    r["command"] = "geom";
    r["nu"] = c.meta.nu;
    r["nv"] = c.meta.nv;
    r["valid_nodes"] = c.valid_count();
    r["area"] = surface_area(c);
    r["origin"] = to_json(to_vec3(origin));
    r["second_moment"] = second_moment(c, s.grid, to_vec3(origin));
    r["min_normN"] = nmin;
    r["gamma_u"] = {{"min", gmin[0]}, {"max", gmax[0]}};
    r["gamma_v"] = {{"min", gmin[1]}, {"max", gmax[1]}};
    emit(r, "", out);
    return kExitOk;
}

inline int run_dist(const std::string& rep, const std::string& a, const std::string& b,
                    const std::vector<double>& origin, std::ostream& out)
{
    const RepKind kind = parse_rep(rep);
    const Vec3 o = to_vec3(origin);
    const double d2 = distance_sq(representation(kind, SampledSurface::from(read_sgrid(a)), o),
                                  representation(kind, SampledSurface::from(read_sgrid(b)), o));
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", std::sqrt(d2));
    out << buf << '\n';
    return kExitOk;
}

inline int run_register(const RegisterArgs& a, std::ostream& out)
{
    Clock clock;
    RegistrationConfig cfg;
    cfg.representation = parse_rep(a.rep);
    cfg.max_iters = a.max_iters;
    cfg.energy_rtol = a.tol;
    cfg.step0 = a.step;
    cfg.smoothing = a.no_smooth ? 0 : a.smoothing;
    cfg.sobolev_lambda = a.sobolev;
    const Vec3 origin = to_vec3(a.origin);
    const SampledSurface reference = SampledSurface::from(read_sgrid(a.reference));
    const SurfaceGrid moving = read_sgrid(a.moving);
    const RegistrationResult r = register_surfaces(reference, moving, cfg, origin);

    write_warp(r.warp, a.output);
    if (!a.resampled.empty()) {
        write_sgrid(r.moving_resampled.grid, a.resampled);
    }
    json rep;
    rep["command"] = "register";
    rep["representation"] = to_string(cfg.representation);
    rep["status"] = to_string(r.status);
    rep["converged"] = r.converged;
    rep["iterations"] = r.iterations;
    rep["initial_energy"] = r.initial_energy();
    rep["final_energy"] = r.final_energy();
    rep["min_det"] = r.min_det_trace.back();
    rep["energy_trace"] = r.energy_trace;
    rep["elapsed_seconds"] = clock.seconds();
    emit(rep, a.report, out);
    return r.converged ? kExitOk : kExitNotConverged;
}

inline int run_mean(const MeanArgs& a, std::ostream& out)
{
    Clock clock;
    if (parse_rep(a.rep) != RepKind::rpsn) {
        throw Error(ErrorCode::kind_mismatch, "the mean is defined for rpsn only");
    }
    MeanConfig cfg;
    cfg.reference_index = a.reference;
    cfg.outer_iters = a.centroid_iters;
    cfg.remove_translations = a.remove_translations;
    cfg.register_constituents = !a.no_register;
    cfg.registration.max_iters = a.max_iters;
    cfg.registration.energy_rtol = a.tol;
    cfg.registration.smoothing = a.no_smooth ? 0 : 1;
    cfg.registration.sobolev_lambda = a.sobolev;
    std::vector<SurfaceGrid> grids;
    for (const auto& path : a.inputs) {
        grids.push_back(read_sgrid(path));
    }
    const MeanResult r = mean_pipeline(grids, cfg);
    write_sgrid(r.mean_grid, a.output);

    json rep;
    rep["command"] = "mean";
    rep["constituents"] = a.inputs.size();
    rep["energy"] = r.energy;
    rep["trace"] = r.trace;
    rep["outer_iterations"] = r.outer_iterations;
    rep["converged"] = r.converged;
    rep["centroid_shift"] = to_json(r.centroid_shift);
    json shifts = json::array(), regs = json::array();
    for (std::size_t i = 0; i < r.constituents.size(); ++i) {
        shifts.push_back(to_json(r.translation_shifts[i]));
        regs.push_back({{"status", to_string(r.constituents[i].status)},
                        {"iterations", r.constituents[i].iterations}});
    }
    rep["translation_shifts"] = shifts;
    rep["registrations"] = regs;
    rep["elapsed_seconds"] = clock.seconds();
    emit(rep, a.report, out);
    return r.converged ? kExitOk : kExitNotConverged;
}

inline int run_gradcheck(std::uint64_t seed, int n, int probes, std::ostream& out)
{
    json rep;
    rep["command"] = "gradcheck";
    rep["grid"] = n;
    rep["seed"] = seed;
    double worst = 0.0;
    for (RepKind kind : {RepKind::srnf, RepKind::rpsn}) {
        const auto r = synth::gradient_check(kind, n, seed, probes);
        rep[to_string(kind)] = r.max_error;
        worst = std::max(worst, r.max_error);
    }
    rep["max_error"] = worst;
    emit(rep, "", out);
    return kExitOk;
}

inline int cli_main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Surface means in square-root representations"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Sample an analytic surface to an SGRID file");
    g->add_option("--family", gen.family, "plane | sphere | torus | bumpy_torus")->capture_default_str();
    g->add_option("--nu", gen.nu)->capture_default_str();
    g->add_option("--nv", gen.nv)->capture_default_str();
    g->add_option("--radius", gen.radius, "sphere radius")->capture_default_str();
    g->add_option("--major", gen.major, "torus R")->capture_default_str();
    g->add_option("--minor", gen.minor, "torus r")->capture_default_str();
    g->add_option("--bump-amplitude", gen.bump_amplitude)->capture_default_str();
    g->add_option("--bump-frequency", gen.bump_frequency)->capture_default_str();
    g->add_option("--offset", gen.offset, "translation x y z")->expected(3);
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--warp-amplitude", gen.warp_amplitude, "reparameterize by a random diffeomorphism");
    g->add_option("--warp-seed", gen.warp_seed)->capture_default_str();
    g->add_option("-o,--output", gen.output)->required();
    g->add_option("--obj", gen.obj, "also write a Wavefront OBJ");

    std::string geom_input;
    std::vector<double> geom_origin;
    auto* ge = app.add_subcommand("geom", "Area, second moment and Christoffel divergence ranges");
    ge->add_option("input", geom_input)->required();
    ge->add_option("--origin", geom_origin)->expected(3);

    std::string dist_rep = "rpsn", dist_a, dist_b;
    std::vector<double> dist_origin;
    auto* d = app.add_subcommand("dist", "L2 distance between two surfaces");
    d->add_option("--rep", dist_rep)->capture_default_str();
    d->add_option("a", dist_a)->required();
    d->add_option("b", dist_b)->required();
    d->add_option("--origin", dist_origin)->expected(3);

    RegisterArgs reg;
    auto* r = app.add_subcommand("register", "Align a moving surface to a reference");
    r->add_option("--rep", reg.rep)->capture_default_str();
    r->add_option("reference", reg.reference)->required();
    r->add_option("moving", reg.moving)->required();
    r->add_option("-o,--output", reg.output, "warp file")->required();
    r->add_option("--resampled", reg.resampled, "write the moving surface resampled through the warp");
    r->add_option("--report", reg.report, "report path (default stdout)");
    r->add_option("--max-iters", reg.max_iters)->capture_default_str();
    r->add_option("--tol", reg.tol, "relative energy decrease that ends the descent")->capture_default_str();
    r->add_option("--step", reg.step, "initial step (0 = automatic)")->capture_default_str();
    r->add_option("--smoothing", reg.smoothing, "gradient smoothing half-width")->capture_default_str();
    r->add_flag("--no-smooth", reg.no_smooth);
    r->add_option("--sobolev", reg.sobolev, "H1 preconditioner length scale squared (0 = off)")
        ->capture_default_str();
    r->add_option("--origin", reg.origin)->expected(3);

    MeanArgs mean;
    auto* m = app.add_subcommand("mean", "Mean of several surfaces");
    m->add_option("--rep", mean.rep)->capture_default_str();
    m->add_option("inputs", mean.inputs)->required()->expected(2, -1);
    m->add_option("-o,--output", mean.output, "mean surface")->required();
    m->add_option("--report", mean.report, "report path (default stdout)");
    m->add_option("--centroid-iters", mean.centroid_iters)->capture_default_str();
    m->add_flag("--remove-translations", mean.remove_translations);
    m->add_flag("--no-register", mean.no_register);
    m->add_option("--reference", mean.reference)->capture_default_str();
    m->add_option("--max-iters", mean.max_iters, "per registration")->capture_default_str();
    m->add_option("--tol", mean.tol)->capture_default_str();
    m->add_flag("--no-smooth", mean.no_smooth);
    m->add_option("--sobolev", mean.sobolev)->capture_default_str();

    std::uint64_t gc_seed = 1;
    int gc_n = 64, gc_probes = 20;
    auto* gc = app.add_subcommand("gradcheck", "Analytic gradient against finite differences");
    gc->add_option("--seed", gc_seed)->capture_default_str();
    gc->add_option("--n", gc_n, "torus grid size")->capture_default_str();
    gc->add_option("--probes", gc_probes)->capture_default_str();

    std::string obj_in, obj_out;
    auto* o = app.add_subcommand("obj", "Convert an SGRID file to Wavefront OBJ");
    o->add_option("input", obj_in)->required();
    o->add_option("output", obj_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    try {
        if (*g) return run_gen(gen, out);
        if (*ge) return run_geom(geom_input, geom_origin, out);
        if (*d) return run_dist(dist_rep, dist_a, dist_b, dist_origin, out);
        if (*r) return run_register(reg, out);
        if (*m) return run_mean(mean, out);
        if (*gc) return run_gradcheck(gc_seed, gc_n, gc_probes, out);
        if (*o) {
            export_obj(read_sgrid(obj_in), obj_out);
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}

} // namespace surfmean::cli
