#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "evflow/egomotion.hpp"
#include "evflow/io.hpp"
#include "evflow/metrics.hpp"
#include "evflow/plot.hpp"
#include "evflow/scene_sim.hpp"
#include "evflow/train.hpp"
#include "evflow/uq.hpp"

namespace {

using namespace evflow;

Vec3 parse_vec3(const std::string& text) {
    Vec3 v;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &v.x(), &v.y(), &v.z(), &extra) != 3)
        throw ParseError("expected 'a,b,c', got '" + text + "'");
    return v;
}

FlowRows read_flows_any(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw FileError("cannot open " + path);
    std::string header;
    std::getline(probe, header);
    probe.close();
    while (!header.empty() && (header.back() == '\r' || header.back() == '\n')) header.pop_back();
    if (header == "t,x,y,ux,uy") return read_flow_csv(path);
    const GtRows gt = read_gt_csv(path);
    return FlowRows{gt.t, gt.xy, gt.u};
}

struct WindowSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    double t_start = 0.0;
    double t_end = 0.0;
};

// Consecutive windows of `length` seconds over a sorted time column.
std::vector<WindowSpan> split_windows(const std::vector<double>& t, double length) {
    std::vector<WindowSpan> spans;
    if (t.empty()) return spans;
    const double origin = t.front();
    std::size_t i = 0;
    while (i < t.size()) {
        const auto w = static_cast<std::size_t>((t[i] - origin) / length);
        const double lo = origin + static_cast<double>(w) * length;
        const double hi = lo + length;
        WindowSpan span{i, i, lo, hi};
        while (span.end < t.size() && t[span.end] < hi) ++span.end;
        spans.push_back(span);
        i = span.end;
    }
    return spans;
}

int run_simulate(const std::string& scene_path, const std::string& v_text,
                 const std::string& w_text, double duration, double t_start, double slice,
                 std::uint64_t seed, const std::string& events_out, const std::string& gt_out) {
    const std::vector<SceneEdge> edges = read_scene_file(scene_path);
    RigidMotion motion;
    motion.v = parse_vec3(v_text);
    motion.omega = parse_vec3(w_text);
    const SimWindow window{t_start, t_start + duration, slice};
    const SimResult sim = simulate(edges, motion, window, seed);
    write_events_evt1(events_out, sim.cloud);
    write_gt_csv(gt_out, sim);
    std::cout << "simulated " << sim.cloud.size() << " events -> " << events_out << ", "
              << gt_out << "\n";
    return 0;
}

struct TrainCliArgs {
    std::vector<std::string> events;
    std::vector<std::string> flows;
    std::string out = "model.nfm";
    std::string log_path;
    TrainConfig cfg;
    AugmentationConfig aug;
    bool no_rotation = false;
};

int run_train(TrainCliArgs& args) {
    if (args.events.size() != args.flows.size() || args.events.empty())
        throw ParseError("--events and --flows must be given the same number of times");
    std::vector<LabeledCloud> dataset;
    for (std::size_t i = 0; i < args.events.size(); ++i) {
        LabeledCloud seq;
        seq.cloud = read_events_auto(args.events[i]);
        const FlowRows rows = read_flows_any(args.flows[i]);
        if (rows.u.size() != seq.cloud.size())
            throw LengthMismatch("flow rows in " + args.flows[i] + " (" +
                                 std::to_string(rows.u.size()) + ") do not match events (" +
                                 std::to_string(seq.cloud.size()) + ")");
        seq.flows = rows.u;
        dataset.push_back(std::move(seq));
    }
    args.aug.rotation = !args.no_rotation;

    std::ofstream log_file;
    std::ostream* log = &std::cout;
    if (!args.log_path.empty()) {
        log_file.open(args.log_path);
        if (!log_file) throw FileError("cannot write " + args.log_path);
        log = &log_file;
    }
    const TrainedModel model = train(dataset, args.cfg, args.aug, log);
    write_model(args.out, model);
    std::cout << "model written to " << args.out << "\n";
    return 0;
}

int run_infer(const std::string& model_path, const std::string& events_path,
              const std::string& out_path, const NeighborhoodSpec& spec, double slice,
              int ensembles, double threshold, std::uint64_t seed) {
    const TrainedModel model = read_model(model_path);
    const RandomProjection proj = RandomProjection::generate(model.projection_seed, model.d);
    const EventCloud cloud = read_events_auto(events_path);
    if (cloud.size() == 0) throw EmptyDataset("no events in " + events_path);
    const EnsembleConfig cfg{ensembles, threshold};

    std::vector<double> times(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) times[i] = cloud.events[i].t;

    EventCloud kept_events;
    std::vector<NormalFlowPrediction> predictions;
    for (const WindowSpan& span : split_windows(times, slice)) {
        EventCloud window;
        window.events.reserve(span.end - span.begin);
        for (std::size_t i = span.begin; i < span.end; ++i) {
            Event e = cloud.events[i];
            e.t -= span.t_start;   // window-relative time for the encoder
            window.events.push_back(e);
        }
        std::vector<std::size_t> original(window.size());
        for (std::size_t i = 0; i < window.size(); ++i) original[i] = span.begin + i;

        if (window.size() > kMaxEventsPerSlice) {
            const auto keep = subsample_indices(window.size(), kMaxEventsPerSlice, seed);
            EventCloud sub;
            std::vector<std::size_t> sub_original;
            sub.events.reserve(keep.size());
            sub_original.reserve(keep.size());
            for (const auto k : keep) {
                sub.events.push_back(window.events[k]);
                sub_original.push_back(original[k]);
            }
            window = std::move(sub);
            original = std::move(sub_original);
        }

        const auto preds = infer_cloud(window, model.mlp, proj, spec, cfg);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            kept_events.events.push_back(cloud.events[original[i]]);
            predictions.push_back(preds[i]);
        }
    }
    write_predictions_csv(out_path, kept_events, predictions);
    std::cout << "wrote " << predictions.size() << " predictions to " << out_path << "\n";
    return 0;
}

int run_eval_flow(const std::string& pred_path, const std::string& gt_path, double window,
                  const std::string& per_window_path) {
    const PredictionRows pred = read_predictions_csv(pred_path);
    const FlowRows gt = read_flows_any(gt_path);
    if (pred.t.size() != gt.t.size())
        throw LengthMismatch("prediction rows (" + std::to_string(pred.t.size()) +
                             ") do not match ground-truth rows (" + std::to_string(gt.t.size()) + ")");
    for (std::size_t i = 0; i < pred.t.size(); ++i) {
        if (std::abs(pred.t[i] - gt.t[i]) > 1e-6 || (pred.xy[i] - gt.xy[i]).norm() > 1e-5)
            throw LengthMismatch("row " + std::to_string(i + 2) +
                                 ": prediction and ground truth refer to different events");
    }

    const auto spans = split_windows(pred.t, window);
    std::ofstream per_window;
    if (!per_window_path.empty()) {
        per_window.open(per_window_path);
        if (!per_window) throw FileError("cannot write " + per_window_path);
        per_window << "t_start,t_end,pee,pos_pct,n,masked\n";
    }

    // Valid-only aggregate (mean of window means) plus an all-predictions
    // variant; the paper never states which population %Pos uses, so both
    // are reported.
    double pee_sum = 0.0, pos_sum = 0.0;
    std::size_t windows_used = 0, n_eval = 0, n_masked = 0;
    double pee_all_sum = 0.0, pos_all_sum = 0.0;
    std::size_t windows_all = 0;

    for (const auto& span : spans) {
        std::vector<Vec2> u_valid, n_valid, u_all, n_all;
        for (std::size_t i = span.begin; i < span.end; ++i) {
            u_all.push_back(gt.u[i]);
            n_all.push_back(pred.n[i]);
            if (pred.valid[i]) {
                u_valid.push_back(gt.u[i]);
                n_valid.push_back(pred.n[i]);
            } else {
                ++n_masked;
            }
        }
        const FlowEvalReport rep = evaluate_flow(u_valid, n_valid);
        n_eval += rep.n_evaluated;
        n_masked += rep.n_masked;
        if (rep.n_evaluated > 0) {
            pee_sum += rep.pee_mean;
            pos_sum += rep.pos_pct;
            ++windows_used;
            if (per_window.is_open())
                per_window << span.t_start << "," << span.t_end << "," << rep.pee_mean << ","
                           << rep.pos_pct << "," << rep.n_evaluated << ","
                           << (span.end - span.begin - rep.n_evaluated) << "\n";
        }
        const FlowEvalReport rep_all = evaluate_flow(u_all, n_all);
        if (rep_all.n_evaluated > 0) {
            pee_all_sum += rep_all.pee_mean;
            pos_all_sum += rep_all.pos_pct;
            ++windows_all;
        }
    }
    if (windows_used == 0) throw EmptyInput("no valid predictions to evaluate");

    std::printf("PEE=%.6f PosPct=%.3f n=%zu masked=%zu\n", pee_sum / windows_used,
                pos_sum / windows_used, n_eval, n_masked);
    std::printf("all-predictions: PEE=%.6f PosPct=%.3f\n",
                windows_all ? pee_all_sum / windows_all : 0.0,
                windows_all ? pos_all_sum / windows_all : 0.0);
    return 0;
}

int run_egomotion(const std::string& pred_path, const std::string& imu_path,
                  const std::string& solver, double window, const std::string& out_path,
                  double scale_gt, double lambda) {
    const PredictionRows pred = read_predictions_csv(pred_path);
    if (pred.t.empty()) throw EmptyPredictions("no predictions in " + pred_path);
    const ImuSamples imu = read_imu_csv(imu_path);

    std::vector<EgoRow> rows;
    for (const auto& span : split_windows(pred.t, window)) {
        std::vector<NormalFlowObs> obs;
        for (std::size_t i = span.begin; i < span.end; ++i) {
            if (!pred.valid[i]) continue;   // uncertainty gating
            const double mag = pred.n[i].norm();
            if (mag < 1e-8) continue;
            obs.push_back(NormalFlowObs{pred.xy[i], pred.n[i] / mag, mag});
        }
        const Vec3 omega0 = imu_window_mean(imu, span.t_start, span.t_end);
        try {
            const TranslationEstimate est =
                solver == "negdepth" ? solve_negative_depth(obs, omega0)
                                     : solve_svm(build_problem(obs, omega0), lambda);
            Vec3 v = est.v;
            if (scale_gt > 0.0) v *= scale_gt;
            rows.push_back(EgoRow{span.t_start, span.t_end, v, est.inlier_fraction});
        } catch (const InsufficientData&) {
            std::cerr << "window [" << span.t_start << ", " << span.t_end
                      << "): too few usable observations, skipped\n";
        } catch (const DegenerateGeometry&) {
            std::cerr << "window [" << span.t_start << ", " << span.t_end
                      << "): degenerate geometry, skipped\n";
        }
    }
    if (rows.empty()) throw InsufficientData("no window produced an estimate");
    write_egomotion_csv(out_path, rows);
    std::cout << "wrote " << rows.size() << " window estimates to " << out_path << "\n";
    return 0;
}

int run_plot(const std::string& pred_path, const std::string& out_path, int width, int height) {
    const PredictionRows rows = read_predictions_csv(pred_path);
    const Image img = render_flow_image(rows, width, height);
    write_ppm(out_path, img);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

void print_config() {
    const NeighborhoodSpec spec;
    const TrainConfig train_cfg;
    const EnsembleConfig ens;
    std::printf("dt=%g\ndx=%g\ndy=%g\n", spec.dt, spec.dx, spec.dy);
    std::printf("eps=%g\n", train_cfg.epsilon);
    std::printf("dim=%d\n", train_cfg.d);
    std::printf("ensembles=%d\n", ens.k);
    std::printf("unc-thresh=%g\n", ens.threshold);
    std::printf("slice=%g\n", train_cfg.slice);
    std::printf("lr=%g\n", static_cast<double>(train_cfg.learning_rate));
    std::printf("epochs=%d\nsteps=%d\n", train_cfg.epochs, train_cfg.steps_per_epoch);
    std::printf("lognorm-min=%g\nlognorm-max=%g\n", train_cfg.lognorm_min, train_cfg.lognorm_max);
    std::printf("hidden=256,256,256\n");
    std::printf("scale-range=0.75,1.25\nsample-range=0.5,1\n");
    std::printf("max-events-per-slice=%zu\n", kMaxEventsPerSlice);
    std::printf("lambda=0.0001\n");
    std::printf("window=%g\n", train_cfg.slice);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"event normal-flow estimation: simulate, train, infer, evaluate, egomotion"};
    app.require_subcommand(0, 1);
    bool want_config = false;
    app.add_flag("--print-config", want_config, "print all defaults and exit");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate events + exact ground truth");
    std::string scene_path, v_text = "0,0,1", w_text = "0,0,0";
    double duration = 0.5, t_start = 0.0, slice = 0.02;
    std::uint64_t seed = 0;
    std::string events_out = "events.evt1", gt_out = "gt.csv";
    sim->add_option("--scene", scene_path, "scene file, one edge per line")->required();
    sim->add_option("--v", v_text, "translation direction vx,vy,vz");
    sim->add_option("--w", w_text, "angular velocity wx,wy,wz (rad/s)");
    sim->add_option("--t", duration, "duration, seconds");
    sim->add_option("--t-start", t_start, "window start, seconds");
    sim->add_option("--slice", slice, "slice length, seconds");
    sim->add_option("--seed", seed, "simulation seed");
    sim->add_option("--events-out", events_out, "EVT1 output path");
    sim->add_option("--gt-out", gt_out, "ground-truth CSV output path");

    // train
    auto* tr = app.add_subcommand("train", "train the normal-flow head");
    TrainCliArgs train_args;
    std::string scale_range = "0.75,1.25", sample_range = "0.5,1.0", hidden_text = "256,256,256";
    tr->add_option("--events", train_args.events, "event file (repeatable)")->required();
    tr->add_option("--flows", train_args.flows, "per-event flow or gt CSV (repeatable)")->required();
    tr->add_option("--out", train_args.out, "model output path");
    tr->add_option("--log", train_args.log_path, "training-log path (default stdout)");
    tr->add_option("--epochs", train_args.cfg.epochs, "epochs");
    tr->add_option("--steps", train_args.cfg.steps_per_epoch, "steps per epoch");
    tr->add_option("--lr", train_args.cfg.learning_rate, "learning rate");
    tr->add_option("--eps", train_args.cfg.epsilon, "radial-loss epsilon");
    tr->add_option("--seed", train_args.cfg.seed, "training seed");
    tr->add_option("--dim", train_args.cfg.d, "encoding dimension");
    tr->add_option("--dt", train_args.cfg.neighborhood.dt, "time radius, seconds");
    tr->add_option("--dx", train_args.cfg.neighborhood.dx, "x radius, normalized px");
    tr->add_option("--dy", train_args.cfg.neighborhood.dy, "y radius, normalized px");
    tr->add_option("--slice", train_args.cfg.slice, "slice length, seconds");
    tr->add_option("--hidden", hidden_text, "hidden widths, comma separated");
    tr->add_flag("--baseline-loss", train_args.cfg.use_baseline_loss,
                 "train with the norm+direction ablation loss");
    tr->add_flag("--no-rotation", train_args.no_rotation, "disable rotation augmentation");
    tr->add_option("--scale-range", scale_range, "augmentation scale range lo,hi");
    tr->add_option("--sample-range", sample_range, "augmentation sample range lo,hi");

    // infer
    auto* inf = app.add_subcommand("infer", "predict per-event normal flow");
    std::string model_path, infer_events, pred_out = "pred.csv";
    NeighborhoodSpec infer_spec;
    double infer_slice = 0.02, unc_thresh = 0.3;
    int ensembles = 5;
    std::uint64_t infer_seed = 0;
    inf->add_option("--model", model_path, "NFM1 model path")->required();
    inf->add_option("--events", infer_events, "event file")->required();
    inf->add_option("--out", pred_out, "prediction CSV output");
    inf->add_option("--ensembles", ensembles, "rotation-ensemble size K");
    inf->add_option("--unc-thresh", unc_thresh, "circular-std validity threshold");
    inf->add_option("--dt", infer_spec.dt, "time radius");
    inf->add_option("--dx", infer_spec.dx, "x radius");
    inf->add_option("--dy", infer_spec.dy, "y radius");
    inf->add_option("--slice", infer_slice, "slice length, seconds");
    inf->add_option("--seed", infer_seed, "subsampling seed");

    // eval-flow
    auto* ev = app.add_subcommand("eval-flow", "evaluate predictions against ground truth");
    std::string eval_pred, eval_gt, per_window_out;
    double eval_window = 0.02;
    ev->add_option("--pred", eval_pred, "prediction CSV")->required();
    ev->add_option("--gt", eval_gt, "flow or gt CSV")->required();
    ev->add_option("--window", eval_window, "aggregation window, seconds");
    ev->add_option("--per-window", per_window_out, "per-window breakdown CSV");

    // egomotion
    auto* ego = app.add_subcommand("egomotion", "recover translation direction");
    std::string ego_pred, ego_imu, ego_solver = "svm", ego_out = "ego.csv";
    double ego_window = 0.02, scale_gt = 0.0, lambda = 1e-4;
    ego->add_option("--pred", ego_pred, "prediction CSV")->required();
    ego->add_option("--imu", ego_imu, "IMU CSV t,wx,wy,wz")->required();
    ego->add_option("--solver", ego_solver, "svm | negdepth")
        ->check(CLI::IsMember({"svm", "negdepth"}));
    ego->add_option("--window", ego_window, "solver window, seconds");
    ego->add_option("--out", ego_out, "output CSV");
    ego->add_option("--scale-gt", scale_gt, "scale unit directions by ground-truth speed");
    ego->add_option("--lambda", lambda, "svm regularization");

    // plot
    auto* pl = app.add_subcommand("plot", "render predictions as an HSV flow image");
    std::string plot_pred, plot_out = "flow.ppm";
    int plot_w = 512, plot_h = 512;
    pl->add_option("--pred", plot_pred, "prediction CSV")->required();
    pl->add_option("--out", plot_out, "PPM output path");
    pl->add_option("--width", plot_w, "image width");
    pl->add_option("--height", plot_h, "image height");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (want_config) {
            print_config();
            return 0;
        }
        if (sim->parsed())
            return run_simulate(scene_path, v_text, w_text, duration, t_start, slice, seed,
                                events_out, gt_out);
        if (tr->parsed()) {
            const Vec3 sr = parse_vec3(scale_range + ",0");
            const Vec3 pr = parse_vec3(sample_range + ",0");
            train_args.aug.scale_min = sr.x();
            train_args.aug.scale_max = sr.y();
            train_args.aug.sample_min = pr.x();
            train_args.aug.sample_max = pr.y();
            train_args.cfg.hidden.clear();
            std::string token;
            std::istringstream hs(hidden_text);
            while (std::getline(hs, token, ','))
                train_args.cfg.hidden.push_back(std::stoi(token));
            return run_train(train_args);
        }
        if (inf->parsed())
            return run_infer(model_path, infer_events, pred_out, infer_spec, infer_slice,
                             ensembles, unc_thresh, infer_seed);
        if (ev->parsed()) return run_eval_flow(eval_pred, eval_gt, eval_window, per_window_out);
        if (ego->parsed())
            return run_egomotion(ego_pred, ego_imu, ego_solver, ego_window, ego_out, scale_gt,
                                 lambda);
        if (pl->parsed()) return run_plot(plot_pred, plot_out, plot_w, plot_h);
        std::cout << app.help();
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Computation ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
