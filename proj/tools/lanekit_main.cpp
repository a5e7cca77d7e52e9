#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lanekit/decoder.hpp"
#include "lanekit/encoder.hpp"
#include "lanekit/fit.hpp"
#include "lanekit/io.hpp"
#include "lanekit/kernels.hpp"
#include "lanekit/metrics.hpp"
#include "lanekit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lanekit;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

io::LaneFile decoded_to_lane_file(const DecodedLaneSet& d) {
    io::LaneFile f;
    f.width = d.spec.width_in;
    f.height = d.spec.height_in;
    for (const DecodedLane& lane : d.lanes) f.lanes.push_back(Lane::from_points(lane.points));
    return f;
}

AssocMode parse_assoc(const std::string& s) {
    if (s == "seq") return AssocMode::Sequential;
    if (s == "simd") return AssocMode::Simd;
    if (s == "threads") return AssocMode::Threaded;
    throw CLI::ValidationError("--assoc must be one of seq|simd|threads");
}

json report_to_json(const EvalReport& r) {
    json j{{"tp", r.tp},           {"fp", r.fp},         {"fn", r.fn},
           {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
    if (r.accuracy.has_value()) j["accuracy"] = *r.accuracy;
    return j;
}

struct EncodeFlags {
    int stride = 8;
    double sigma = 0.5;
    int points_per_lane = 10;

    void attach(CLI::App* cmd) {
        cmd->add_option("--stride", stride, "Output stride r")->capture_default_str();
        cmd->add_option("--sigma", sigma, "Gaussian std-dev in map cells")->capture_default_str();
        cmd->add_option("--points-per-lane", points_per_lane, "Keypoints sampled per lane (K)")
            ->capture_default_str();
    }
    EncoderConfig config() const { return EncoderConfig{sigma, points_per_lane, stride}; }
};

struct DecodeFlags {
    double threshold = 0.4;
    double theta_dis = 4.0;
    int nms_width = 3;
    double start_norm_limit = 1.0;
    std::string assoc = "seq";
    unsigned threads = 4;

    void attach(CLI::App* cmd) {
        cmd->add_option("--threshold", threshold, "Keypoint confidence threshold")->capture_default_str();
        cmd->add_option("--theta-dis", theta_dis, "Association distance bound, map cells")->capture_default_str();
        cmd->add_option("--nms-width", nms_width, "Horizontal max-pool window (odd)")->capture_default_str();
        cmd->add_option("--start-norm-limit", start_norm_limit, "Offset-norm bound for start candidates")
            ->capture_default_str();
        cmd->add_option("--assoc", assoc, "Association path: seq|simd|threads")->capture_default_str();
        cmd->add_option("--threads", threads, "Worker threads for --assoc threads")->capture_default_str();
    }
    DecoderConfig config() const {
        return DecoderConfig{threshold, theta_dis, nms_width, start_norm_limit, parse_assoc(assoc), threads};
    }
};

int run_eval(const fs::path& pred_path, const fs::path& gt_path, const std::string& metric,
             const CulaneConfig& ccfg, const TusimpleConfig& tcfg) {
    struct Pair {
        io::LaneFile pred, gt;
    };
    std::vector<Pair> pairs;
    if (fs::is_directory(gt_path)) {
        if (!fs::is_directory(pred_path))
            throw std::invalid_argument("when --gt is a directory, --pred must be one too");
        std::vector<fs::path> names;
        for (const auto& e : fs::directory_iterator(gt_path))
            if (e.path().extension() == ".json") names.push_back(e.path().filename());
        std::sort(names.begin(), names.end());
        for (const fs::path& name : names) {
            Pair p;
            p.gt = io::read_lane_file(gt_path / name);
            const fs::path pf = pred_path / name;
            if (fs::exists(pf)) {
                p.pred = io::read_lane_file(pf);
            } else {
                p.pred.width = p.gt.width;  // missing prediction counts as empty
                p.pred.height = p.gt.height;
            }
            pairs.push_back(std::move(p));
        }
    } else {
        pairs.push_back({io::read_lane_file(pred_path), io::read_lane_file(gt_path)});
    }

    EvalReport total;
    long points = 0, correct = 0;
    for (const Pair& p : pairs) {
        if (p.pred.width != p.gt.width || p.pred.height != p.gt.height)
            throw std::invalid_argument("prediction and ground-truth dimensions differ");
        EvalReport r = metric == "culane" ? culane_f1(p.pred.lanes, p.gt.lanes, p.gt.width, p.gt.height, ccfg)
                                          : tusimple_accuracy(p.pred.lanes, p.gt.lanes, p.gt.width, p.gt.height, tcfg);
        total.tp += r.tp;
        total.fp += r.fp;
        total.fn += r.fn;
        if (metric == "tusimple") {
            points += r.gt_points;
            correct += r.correct_points;
        }
    }
    finalize_counts(total);
    if (metric == "tusimple") total.accuracy = points > 0 ? static_cast<double>(correct) / points : 0.0;
    std::cout << report_to_json(total).dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Keypoint-based lane detection toolkit: target encoding, losses, decoding, metrics"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic lane corpus with target tensors");
    fs::path synth_out;
    int synth_scenes = 1;
    SceneSpec scene_spec;
    std::string family = "quadratic";
    EncodeFlags synth_enc;
    synth_cmd->add_option("--out-dir", synth_out, "Output directory")->required();
    synth_cmd->add_option("--scenes", synth_scenes, "Number of scenes")->capture_default_str();
    synth_cmd->add_option("--lanes", scene_spec.n_lanes, "Lanes per scene")->capture_default_str();
    synth_cmd->add_option("--width", scene_spec.width, "Image width")->capture_default_str();
    synth_cmd->add_option("--height", scene_spec.height, "Image height")->capture_default_str();
    synth_cmd->add_option("--family", family, "Lane family: straight|quadratic|cubic")->capture_default_str();
    synth_cmd->add_option("--min-start-sep", scene_spec.min_start_sep, "Minimum starting-point spacing, px")
        ->capture_default_str();
    synth_cmd->add_option("--edge-margin", scene_spec.edge_margin, "Border margin, px")->capture_default_str();
    synth_cmd->add_option("--seed", scene_spec.seed, "Base seed; scene i uses seed+i")->capture_default_str();
    Corruption corruption;
    std::uint64_t corrupt_seed = 1;
    synth_cmd->add_option("--confidence-noise", corruption.confidence_noise, "Gaussian noise on the confidence map")
        ->capture_default_str();
    synth_cmd->add_option("--offset-noise", corruption.offset_noise, "Gaussian noise on masked offsets, cells")
        ->capture_default_str();
    synth_cmd->add_option("--dropout", corruption.dropout, "Keypoint-cell drop probability")->capture_default_str();
    synth_cmd->add_option("--false-peak-rate", corruption.false_peak_rate, "Expected spurious peaks per scene")
        ->capture_default_str();
    synth_cmd->add_option("--corrupt-seed", corrupt_seed, "Corruption seed; scene i uses corrupt-seed+i")
        ->capture_default_str();
    synth_enc.attach(synth_cmd);

    // ---- encode ----
    auto* encode_cmd = app.add_subcommand("encode", "Encode ground-truth lanes into target tensors");
    fs::path encode_lanes, encode_out;
    EncodeFlags encode_enc;
    encode_cmd->add_option("--lanes", encode_lanes, "Lane JSON input")->required();
    encode_cmd->add_option("--out-dir", encode_out, "Output directory")->required();
    encode_enc.attach(encode_cmd);

    // ---- decode ----
    auto* decode_cmd = app.add_subcommand("decode", "Decode lane instances from map tensors");
    fs::path decode_in, decode_out;
    DecodeFlags decode_flags;
    decode_cmd->add_option("--in-dir", decode_in, "Directory with confidence/quant/offsets tensors")->required();
    decode_cmd->add_option("--out", decode_out, "Lane JSON output (stdout when omitted)");
    decode_flags.attach(decode_cmd);

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
    fs::path eval_pred, eval_gt;
    std::string metric = "culane";
    CulaneConfig culane_cfg;
    TusimpleConfig tusimple_cfg;
    eval_cmd->add_option("--pred", eval_pred, "Predicted lane JSON file or directory")->required();
    eval_cmd->add_option("--gt", eval_gt, "Ground-truth lane JSON file or directory")->required();
    eval_cmd->add_option("--metric", metric, "culane|tusimple")->capture_default_str();
    eval_cmd->add_option("--iou-threshold", culane_cfg.iou_threshold, "CULane IoU threshold")
        ->capture_default_str();
    eval_cmd->add_option("--lane-width", culane_cfg.lane_width, "CULane stroke width, px")->capture_default_str();
    eval_cmd->add_option("--pixel-tolerance", tusimple_cfg.pixel_tolerance, "TuSimple point tolerance, px")
        ->capture_default_str();
    eval_cmd->add_option("--lane-accuracy-threshold", tusimple_cfg.lane_accuracy_threshold,
                         "TuSimple per-lane accuracy threshold")
        ->capture_default_str();
    eval_cmd->add_option("--eval-rows", tusimple_cfg.eval_rows,
                         "Explicit TuSimple evaluation rows (default: every 10 px)");

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "Gradient-descent demo: fit map tensors to a scene's total loss");
    fs::path fit_lanes, fit_out;
    EncodeFlags fit_enc;
    DecodeFlags fit_dec;
    FitConfig fit_cfg;
    std::string squash = "sigmoid";
    fit_cmd->add_option("--lanes", fit_lanes, "Ground-truth lane JSON")->required();
    fit_cmd->add_option("--out-dir", fit_out, "Output directory")->required();
    fit_cmd->add_option("--lr", fit_cfg.lr, "Learning rate")->capture_default_str();
    fit_cmd->add_option("--iterations", fit_cfg.iterations, "Gradient-descent iterations")->capture_default_str();
    fit_cmd->add_option("--log-every", fit_cfg.log_every, "Loss-curve cadence")->capture_default_str();
    fit_cmd->add_option("--lambda-point", fit_cfg.loss.lambda_point, "Weight of the keypoint loss")
        ->capture_default_str();
    fit_cmd->add_option("--lambda-quant", fit_cfg.loss.lambda_quant, "Weight of the compensation loss")
        ->capture_default_str();
    fit_cmd->add_option("--lambda-offset", fit_cfg.loss.lambda_offset, "Weight of the offset loss")
        ->capture_default_str();
    fit_cmd->add_option("--lambda-aux", fit_cfg.loss.lambda_aux, "Weight of the auxiliary loss")
        ->capture_default_str();
    fit_cmd->add_option("--alpha", fit_cfg.loss.alpha, "Focal alpha")->capture_default_str();
    fit_cmd->add_option("--beta", fit_cfg.loss.beta, "Focal beta")->capture_default_str();
    fit_cmd->add_option("--smooth-l1-beta", fit_cfg.loss.smooth_l1_beta, "SmoothL1 transition point")
        ->capture_default_str();
    fit_cmd->add_option("--m-samples", fit_cfg.m_samples, "Predicted adjacent offsets per keypoint (M)")
        ->capture_default_str();
    fit_cmd->add_option("--squash", squash, "Confidence parameterization: sigmoid|clamp")->capture_default_str();
    fit_cmd->add_flag("--init-at-target", fit_cfg.init_at_target, "Initialize at the loss minimizer");
    fit_cmd->add_option("--init-confidence", fit_cfg.init_confidence, "Flat confidence init")
        ->capture_default_str();
    fit_enc.attach(fit_cmd);
    fit_dec.attach(fit_cmd);

    // ---- bench ----
    auto* bench_cmd = app.add_subcommand("bench", "Measure decoder throughput on a synthetic corpus");
    int bench_scenes = 20, bench_repeats = 5;
    SceneSpec bench_spec;
    EncodeFlags bench_enc;
    DecodeFlags bench_dec;
    bench_cmd->add_option("--scenes", bench_scenes, "Scenes in the corpus")->capture_default_str();
    bench_cmd->add_option("--repeats", bench_repeats, "Timed decode passes")->capture_default_str();
    bench_cmd->add_option("--lanes", bench_spec.n_lanes, "Lanes per scene")->capture_default_str();
    bench_cmd->add_option("--width", bench_spec.width, "Image width")->capture_default_str();
    bench_cmd->add_option("--height", bench_spec.height, "Image height")->capture_default_str();
    bench_cmd->add_option("--seed", bench_spec.seed, "Base seed")->capture_default_str();
    bench_enc.attach(bench_cmd);
    bench_dec.attach(bench_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (synth_cmd->parsed()) {
            SceneSpec spec = scene_spec;
            if (family == "straight")
                spec.family = LaneFamily::Straight;
            else if (family == "quadratic")
                spec.family = LaneFamily::Quadratic;
            else if (family == "cubic")
                spec.family = LaneFamily::Cubic;
            else
                throw std::invalid_argument("--family must be straight|quadratic|cubic");
            for (int i = 0; i < synth_scenes; ++i) {
                spec.seed = scene_spec.seed + static_cast<std::uint64_t>(i);
                Scene scene = generate(spec);
                char name[32];
                std::snprintf(name, sizeof(name), "scene_%03d", i);
                const fs::path dir = synth_out / name;
                fs::create_directories(dir);
                io::write_lane_file(dir / "lanes.json", {scene.width, scene.height, scene.lanes});
                GridSpec gspec(scene.height, scene.width, synth_enc.stride);
                Targets targets = encode(scene.lanes, gspec, synth_enc.config());
                const bool corrupted = corruption.confidence_noise > 0.0 || corruption.offset_noise > 0.0 ||
                                       corruption.dropout > 0.0 || corruption.false_peak_rate > 0.0;
                if (corrupted) targets = corrupt(targets, corruption, corrupt_seed + static_cast<std::uint64_t>(i));
                io::write_targets(dir, targets);
            }
            return 0;
        }

        if (encode_cmd->parsed()) {
            io::LaneFile f = io::read_lane_file(encode_lanes);
            GridSpec spec(f.height, f.width, encode_enc.stride);
            io::write_targets(encode_out, encode(f.lanes, spec, encode_enc.config()));
            return 0;
        }

        if (decode_cmd->parsed()) {
            Grid conf = io::grid_from_tensor(io::read_tensor(decode_in / "confidence.t32"));
            Grid quant = io::grid_from_tensor(io::read_tensor(decode_in / "quant.t32"));
            Grid offsets = io::grid_from_tensor(io::read_tensor(decode_in / "offsets.t32"));
            if (!(conf.spec() == quant.spec()) || !(conf.spec() == offsets.spec()))
                throw std::invalid_argument("tensor files disagree on the grid spec");
            DecodedLaneSet d = decode(conf, quant, offsets, decode_flags.config());
            io::LaneFile out = decoded_to_lane_file(d);
            if (decode_out.empty())
                std::cout << io::to_json(out) << "\n";
            else
                io::write_lane_file(decode_out, out);
            return 0;
        }

        if (eval_cmd->parsed()) {
            if (metric != "culane" && metric != "tusimple")
                throw std::invalid_argument("--metric must be culane or tusimple");
            return run_eval(eval_pred, eval_gt, metric, culane_cfg, tusimple_cfg);
        }

        if (fit_cmd->parsed()) {
            if (squash == "sigmoid")
                fit_cfg.squash = Squash::Sigmoid;
            else if (squash == "clamp")
                fit_cfg.squash = Squash::Clamp;
            else
                throw std::invalid_argument("--squash must be sigmoid or clamp");

            io::LaneFile f = io::read_lane_file(fit_lanes);
            GridSpec spec(f.height, f.width, fit_enc.stride);
            Targets targets = encode(f.lanes, spec, fit_enc.config());
            FitResult result = fit(targets, fit_cfg);

            fs::create_directories(fit_out);
            std::ofstream csv(fit_out / "loss.csv");
            csv << "iteration,point,quant,offset,aux,total,grad_norm\n";
            for (const FitTrace& t : result.trace)
                csv << t.iteration << ',' << t.point << ',' << t.quant << ',' << t.offset << ',' << t.aux << ','
                    << t.total << ',' << t.grad_norm << "\n";

            io::write_tensor(fit_out / "confidence.t32",
                             io::tensor_from_grid(result.confidence, "confidence", "probability"));
            io::write_tensor(fit_out / "quant.t32", io::tensor_from_grid(result.quant, "quant", "cells"));
            io::write_tensor(fit_out / "offsets.t32", io::tensor_from_grid(result.offsets, "offsets", "cells"));
            io::Tensor aux;
            aux.name = "aux_pred";
            aux.units = "cells";
            aux.stride = spec.stride;
            aux.channels = 2;
            const int nk = static_cast<int>(result.aux_pred.size());
            aux.dims = {nk, fit_cfg.m_samples};
            aux.values.assign(static_cast<std::size_t>(2) * nk * fit_cfg.m_samples, 0.0);
            const std::size_t plane = static_cast<std::size_t>(nk) * fit_cfg.m_samples;
            for (int i = 0; i < nk; ++i)
                for (int m = 0; m < fit_cfg.m_samples; ++m) {
                    aux.values[static_cast<std::size_t>(i) * fit_cfg.m_samples + m] = result.aux_pred[i][m].x;
                    aux.values[plane + static_cast<std::size_t>(i) * fit_cfg.m_samples + m] =
                        result.aux_pred[i][m].y;
                }
            io::write_tensor(fit_out / "aux_pred.t32", aux);

            DecodedLaneSet d = decode(result.confidence, result.quant, result.offsets, fit_dec.config());
            io::write_lane_file(fit_out / "lanes_fit.json", decoded_to_lane_file(d));

            json meta{{"squash", squash},
                      {"lr", fit_cfg.lr},
                      {"iterations", fit_cfg.iterations},
                      {"m_samples", fit_cfg.m_samples},
                      {"lambda_point", fit_cfg.loss.lambda_point},
                      {"lambda_quant", fit_cfg.loss.lambda_quant},
                      {"lambda_offset", fit_cfg.loss.lambda_offset},
                      {"lambda_aux", fit_cfg.loss.lambda_aux},
                      {"offset_units", "cells"},
                      {"diverged", result.diverged},
                      {"last_finite_iteration", result.last_finite_iteration},
                      {"initial_total", result.trace.empty() ? 0.0 : result.trace.front().total},
                      {"final_total", result.trace.empty() ? 0.0 : result.trace.back().total}};
            std::ofstream(fit_out / "fit_meta.json") << meta.dump(2) << "\n";

            if (result.diverged) {
                std::cerr << "fit diverged: loss became non-finite; last finite iteration was "
                          << result.last_finite_iteration << "\n";
                return kExitNumeric;
            }
            return 0;
        }

        if (bench_cmd->parsed()) {
            struct Prepared {
                Grid conf, quant, offsets;
            };
            std::vector<Prepared> scenes;
            std::size_t keypoints = 0;
            for (int i = 0; i < bench_scenes; ++i) {
                SceneSpec spec = bench_spec;
                spec.seed = bench_spec.seed + static_cast<std::uint64_t>(i);
                Scene scene = generate(spec);
                GridSpec gspec(scene.height, scene.width, bench_enc.stride);
                Targets t = encode(scene.lanes, gspec, bench_enc.config());
                keypoints += t.adjacency.size();
                scenes.push_back({std::move(t.confidence), std::move(t.quant), std::move(t.offsets)});
            }
            DecoderConfig dcfg = bench_dec.config();
            std::size_t decoded_lanes = 0;
            const auto start = std::chrono::steady_clock::now();
            for (int rep = 0; rep < bench_repeats; ++rep)
                for (const Prepared& s : scenes) decoded_lanes += decode(s.conf, s.quant, s.offsets, dcfg).lanes.size();
            const auto stop = std::chrono::steady_clock::now();
            const double seconds = std::chrono::duration<double>(stop - start).count();
            const double total_scenes = static_cast<double>(bench_scenes) * bench_repeats;
            const double total_keypoints = static_cast<double>(keypoints) * bench_repeats;
            json out{{"backend", kernels::backend_name()},
                     {"assoc", bench_dec.assoc},
                     {"scenes", bench_scenes},
                     {"repeats", bench_repeats},
                     {"decoded_lanes", decoded_lanes},
                     {"seconds", seconds},
                     {"scenes_per_sec", seconds > 0.0 ? total_scenes / seconds : 0.0},
                     {"keypoints_per_sec", seconds > 0.0 ? total_keypoints / seconds : 0.0}};
            std::cout << out.dump() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return 0;
}
