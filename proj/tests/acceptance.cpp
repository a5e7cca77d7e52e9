// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lanekit/decoder.hpp"
#include "lanekit/encoder.hpp"
#include "lanekit/fit.hpp"
#include "lanekit/io.hpp"
#include "lanekit/kernels.hpp"
#include "lanekit/lfa.hpp"
#include "lanekit/losses.hpp"
#include "lanekit/matcher.hpp"
#include "lanekit/metrics.hpp"
#include "lanekit/synth.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

namespace fs = std::filesystem;
using namespace lanekit;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", criterion, name, detail.c_str());
    if (!pass) ++g_failures;
}

struct CorpusScene {
    Scene scene;
    Targets targets;
    std::vector<Lane> gt_sorted;  // sampled lanes ordered by starting x
};

constexpr int kCorpusSize = 100;
const GridSpec kSpec(320, 800, 8);
const EncoderConfig kEnc{0.5, 10, 8};

std::vector<CorpusScene> build_corpus() {
    std::vector<CorpusScene> corpus;
    corpus.reserve(kCorpusSize);
    for (std::uint64_t seed = 0; seed < kCorpusSize; ++seed) {
        CorpusScene cs;
        cs.scene = generate(scenes::corpus_scene(seed));
        cs.targets = encode(cs.scene.lanes, kSpec, kEnc);
        cs.gt_sorted = cs.targets.sampled;
        std::sort(cs.gt_sorted.begin(), cs.gt_sorted.end(),
                  [](const Lane& a, const Lane& b) { return a.starting_point().x < b.starting_point().x; });
        corpus.push_back(std::move(cs));
    }
    return corpus;
}

// mean per-keypoint distance in input pixels; -1 when the structure differs
double recovery_error(const DecodedLaneSet& d, const std::vector<Lane>& gt) {
    if (d.lanes.size() != gt.size()) return -1.0;
    double err = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (d.lanes[i].points.size() != gt[i].size()) return -1.0;
        for (std::size_t j = 0; j < gt[i].size(); ++j) {
            err += std::hypot(d.lanes[i].points[j].x - gt[i][j].x, d.lanes[i].points[j].y - gt[i][j].y);
            ++count;
        }
    }
    return err / count;
}

void criterion_1_and_2_and_3(const std::vector<CorpusScene>& corpus) {
    const auto start = std::chrono::steady_clock::now();
    bool recovered = true;
    double worst_err = 0.0;
    std::string fail_detail;

    bool votes_ok = true;
    double worst_vote = 0.0;

    bool parallel_ok = true;

    for (const CorpusScene& cs : corpus) {
        DecoderConfig seq;
        DecodedLaneSet d = decode(cs.targets.confidence, cs.targets.quant, cs.targets.offsets, seq);
        const double err = recovery_error(d, cs.gt_sorted);
        if (err < 0.0 || err >= 0.5) {
            recovered = false;
            fail_detail = "seed failure";
        }
        worst_err = std::max(worst_err, err);

        // criterion 2: every keypoint's vote lands within 0.5 cells of its
        // true starting point
        for (const Lane& lane : cs.targets.sampled) {
            MapCoords s = to_map_coords(lane.starting_point(), kSpec);
            for (const Keypoint& p : lane.points()) {
                MapCoords m = to_map_coords(p, kSpec);
                const double vx = m.mx + cs.targets.offsets.at(0, m.iy, m.ix);
                const double vy = m.my + cs.targets.offsets.at(1, m.iy, m.ix);
                const double dist = std::hypot(vx - s.mx, vy - s.my);
                worst_vote = std::max(worst_vote, dist);
                if (dist >= 0.5) votes_ok = false;
            }
        }

        // criterion 3: association paths produce byte-identical lane JSON
        DecoderConfig simd = seq;
        simd.mode = AssocMode::Simd;
        DecoderConfig thr = seq;
        thr.mode = AssocMode::Threaded;
        auto to_json_bytes = [&](const DecodedLaneSet& set) {
            io::LaneFile f;
            f.width = kSpec.width_in;
            f.height = kSpec.height_in;
            for (const DecodedLane& lane : set.lanes) f.lanes.push_back(Lane::from_points(lane.points));
            return io::to_json(f);
        };
        const std::string a = to_json_bytes(d);
        const std::string b = to_json_bytes(decode(cs.targets.confidence, cs.targets.quant, cs.targets.offsets, simd));
        const std::string c = to_json_bytes(decode(cs.targets.confidence, cs.targets.quant, cs.targets.offsets, thr));
        if (a != b || a != c) parallel_ok = false;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    char buf[160];
    std::snprintf(buf, sizeof(buf), "100 scenes, N recovered exactly, worst mean error %.2e px, %.2f s",
                  worst_err, seconds);
    report(1, "round-trip fidelity", recovered && seconds < 5.0, buf);
    std::snprintf(buf, sizeof(buf), "worst vote-to-start distance %.2e cells (bound 0.5)", worst_vote);
    report(2, "starting-point voting", votes_ok, buf);
    report(3, "parallel association", parallel_ok,
           parallel_ok ? "sequential, SIMD and threaded lane JSON byte-identical on all scenes"
                       : "association paths disagree");
}

void criterion_4_matcher() {
    Rng rng(2024);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const int rows = 1 + static_cast<int>(rng.uniform(0.0, 8.0));
        const int cols = 1 + static_cast<int>(rng.uniform(0.0, 8.0));
        CostMatrix c(rows, cols);
        for (int m = 0; m < rows; ++m)
            for (int k = 0; k < cols; ++k)
                c.at(m, k) = rng.bernoulli(0.2) ? std::floor(rng.uniform(0.0, 5.0)) : rng.uniform(0.0, 10.0);
        Assignment got = solve(c);
        auto want = oracles::brute_force_assignment(c);
        if (got.total_cost != want.total) ok = false;  // exact: same pair set, same summation order
    }
    report(4, "matcher optimality (1000 random, zero tolerance)", ok,
           ok ? "solve() equals the factorial brute force on every instance" : "brute-force mismatch");
}

void criterion_5_gradients() {
    Rng rng(4242);
    LossConfig cfg;
    const GridSpec spec(64, 64, 8);
    bool focal_ok = true, l1_ok = true, aux_ok = true, lfa_ok = true;

    for (int trial = 0; trial < 50; ++trial) {
        Grid pred(spec, 1), target(spec, 1);
        for (double& v : pred.data()) v = rng.uniform(0.05, 0.95);
        for (double& v : target.data()) v = rng.bernoulli(0.2) ? 1.0 : rng.uniform(0.0, 0.99);
        LossReport r = focal_loss(pred, target, cfg);
        Grid num = oracles::central_diff([&](const Grid& g) { return focal_loss(g, target, cfg).value; }, pred,
                                         1e-4);
        for (std::size_t i = 0; i < num.data().size(); ++i)
            if (!oracles::close(r.grad.data()[i], num.data()[i], 1e-3)) focal_ok = false;
    }

    for (int trial = 0; trial < 50; ++trial) {
        Grid pred(spec, 2), target(spec, 2), mask(spec, 1);
        for (double& v : pred.data()) v = rng.uniform(-2, 2);
        for (double& v : target.data()) v = rng.uniform(-2, 2);
        for (double& v : mask.data()) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
        LossReport r = masked_l1(pred, target, mask);
        Grid num = oracles::central_diff([&](const Grid& g) { return masked_l1(g, target, mask).value; }, pred,
                                         1e-4);
        for (std::size_t i = 0; i < num.data().size(); ++i) {
            if (std::fabs(pred.data()[i] - target.data()[i]) < 1e-3) continue;  // kink-adjacent
            if (!oracles::close(r.grad.data()[i], num.data()[i], 1e-3)) l1_ok = false;
        }
    }

    int aux_checked = 0;
    for (int trial = 0; trial < 200 && aux_checked < 50; ++trial) {
        std::vector<AuxItem> items(2);
        for (AuxItem& it : items) {
            it.pred.resize(3);
            it.gt.resize(4);
            for (Vec2& v : it.pred) v = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
            for (Vec2& v : it.gt) v = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
        }
        bool usable = true;
        for (const AuxItem& it : items) {
            CostMatrix c(3, 4);
            for (int m = 0; m < 3; ++m)
                for (int k = 0; k < 4; ++k)
                    c.at(m, k) = std::hypot(it.pred[m].x - it.gt[k].x, it.pred[m].y - it.gt[k].y);
            for (const auto& [m, k] : oracles::brute_force_assignment(c).pairs) {
                for (int comp = 0; comp < 2; ++comp) {
                    const double r = comp == 0 ? it.pred[m].x - it.gt[k].x : it.pred[m].y - it.gt[k].y;
                    if (std::fabs(r) < 1e-3 || std::fabs(std::fabs(r) - cfg.smooth_l1_beta) < 1e-3) usable = false;
                }
            }
        }
        if (!usable) continue;
        ++aux_checked;
        AuxLossReport r = aux_loss(items, cfg);
        for (std::size_t i = 0; i < items.size(); ++i)
            for (std::size_t m = 0; m < items[i].pred.size(); ++m)
                for (int comp = 0; comp < 2; ++comp) {
                    double base = comp == 0 ? items[i].pred[m].x : items[i].pred[m].y;
                    double num = oracles::central_diff_scalar(
                        [&](double v) {
                            auto copy = items;
                            (comp == 0 ? copy[i].pred[m].x : copy[i].pred[m].y) = v;
                            return aux_loss(copy, cfg).value;
                        },
                        base, 1e-4);
                    const double got = comp == 0 ? r.grad[i][m].x : r.grad[i][m].y;
                    if (!oracles::close(got, num, 1e-3, 1e-7)) aux_ok = false;
                }
    }

    const GridSpec lfa_spec(48, 48, 8);
    for (int trial = 0; trial < 50; ++trial) {
        Grid f(lfa_spec, 3);
        for (double& v : f.data()) v = rng.uniform(-2, 2);
        SampleSet s;
        s.anchor = {rng.uniform(1.2, 3.8), rng.uniform(1.2, 3.8)};
        for (int m = 0; m < 4; ++m) {
            Vec2 off;
            do {
                off = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
            } while (std::fabs(s.anchor.x + off.x - std::round(s.anchor.x + off.x)) < 1e-2 ||
                     std::fabs(s.anchor.y + off.y - std::round(s.anchor.y + off.y)) < 1e-2);
            s.offsets.push_back(off);
            s.weights.push_back(rng.uniform(-1, 1));
        }
        std::vector<double> upstream{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto scalar_out = [&](const Grid& grid, const SampleSet& set) {
            auto out = aggregate(grid, set);
            double dot = 0.0;
            for (int c = 0; c < 3; ++c) dot += out[c] * upstream[c];
            return dot;
        };
        AggregateGrad grad = aggregate_grad(f, s, upstream);
        Grid num_f = oracles::central_diff([&](const Grid& g) { return scalar_out(g, s); }, f, 1e-4);
        for (std::size_t i = 0; i < num_f.data().size(); ++i)
            if (!oracles::close(grad.d_feature.data()[i], num_f.data()[i], 1e-3, 1e-8)) lfa_ok = false;
        for (std::size_t m = 0; m < s.offsets.size(); ++m) {
            double nx = oracles::central_diff_scalar(
                [&](double v) {
                    SampleSet c = s;
                    c.offsets[m].x = v;
                    return scalar_out(f, c);
                },
                s.offsets[m].x, 1e-4);
            double ny = oracles::central_diff_scalar(
                [&](double v) {
                    SampleSet c = s;
                    c.offsets[m].y = v;
                    return scalar_out(f, c);
                },
                s.offsets[m].y, 1e-4);
            if (!oracles::close(grad.d_offsets[m].x, nx, 1e-3, 1e-8)) lfa_ok = false;
            if (!oracles::close(grad.d_offsets[m].y, ny, 1e-3, 1e-8)) lfa_ok = false;
        }
    }

    char buf[180];
    std::snprintf(buf, sizeof(buf), "focal %s, masked L1 %s, aux SmoothL1 %s (%d instances), LFA %s",
                  focal_ok ? "ok" : "FAIL", l1_ok ? "ok" : "FAIL", aux_ok ? "ok" : "FAIL", aux_checked,
                  lfa_ok ? "ok" : "FAIL");
    report(5, "analytic gradients vs central differences", focal_ok && l1_ok && aux_ok && lfa_ok, buf);
}

void criterion_6_minimum(const std::vector<CorpusScene>& corpus) {
    const Targets& t = corpus.front().targets;
    const LossConfig cfg;
    const double eps = cfg.focal_eps;

    // the focal term's minimizer is the binary keypoint indicator; the other
    // terms are minimized exactly at their targets
    Grid conf(t.confidence.spec(), 1);
    for (std::size_t i = 0; i < conf.data().size(); ++i)
        conf.data()[i] = t.mask.data()[i] != 0.0 ? 1.0 - eps : eps;
    std::vector<AuxItem> aux_items;
    for (const auto& adj : t.adjacency) {
        AuxItem it;
        it.gt = adj.offsets;
        it.pred.assign(9, adj.offsets.front());
        for (std::size_t m = 0; m < 9 && m < adj.offsets.size(); ++m) it.pred[m] = adj.offsets[m];
        aux_items.push_back(it);
    }
    TotalLossReport rep = total_loss(conf, t.quant, t.offsets, aux_items, t, cfg);

    double sq = 0.0;
    for (double g : rep.conf_grad.data()) sq += g * g;
    for (double g : rep.quant_grad.data()) sq += g * g;
    for (double g : rep.offset_grad.data()) sq += g * g;
    for (const auto& per : rep.aux_grad)
        for (const Vec2& g : per) sq += g.x * g.x + g.y * g.y;
    const double grad_norm = std::sqrt(sq);

    const bool ok = rep.point <= 1e-6 && rep.quant <= 1e-6 && rep.offset <= 1e-6 && rep.aux <= 1e-6 &&
                    grad_norm <= 1e-6;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "terms (%.1e, %.1e, %.1e, %.1e), grad norm %.1e", rep.point, rep.quant,
                  rep.offset, rep.aux, grad_norm);
    report(6, "loss minimum consistency", ok, buf);
}

void criterion_7_metrics(const std::vector<CorpusScene>& corpus) {
    bool ok = true;
    for (const CorpusScene& cs : corpus) {
        EvalReport cu = culane_f1(cs.scene.lanes, cs.scene.lanes, cs.scene.width, cs.scene.height, CulaneConfig{});
        if (cu.f1 != 1.0) ok = false;
        EvalReport tu =
            tusimple_accuracy(cs.scene.lanes, cs.scene.lanes, cs.scene.width, cs.scene.height, TusimpleConfig{});
        if (!tu.accuracy.has_value() || *tu.accuracy != 1.0) ok = false;

        auto shifted = [&](double dx) {
            LaneSet out;
            for (const Lane& lane : cs.scene.lanes) {
                std::vector<Keypoint> pts = lane.points();
                for (Keypoint& p : pts) p.x += dx;
                out.push_back(Lane::from_points(std::move(pts)));
            }
            return out;
        };
        EvalReport in19 = tusimple_accuracy(shifted(19.0), cs.scene.lanes, cs.scene.width, cs.scene.height,
                                            TusimpleConfig{});
        EvalReport out21 = tusimple_accuracy(shifted(21.0), cs.scene.lanes, cs.scene.width, cs.scene.height,
                                             TusimpleConfig{});
        if (*in19.accuracy != 1.0 || *out21.accuracy != 0.0) ok = false;
    }
    report(7, "metric sanity (perfect scores; 19 px in, 21 px out)", ok,
           ok ? "culane_f1(L,L)=1 and tusimple(L,L)=1 on all scenes; shifts behave per the 20 px bound"
              : "metric mismatch");
}

void criterion_8_fit() {
    const fs::path dir = fs::temp_directory_path() / "lanekit_acceptance_fit";
    fs::remove_all(dir);
    fs::create_directories(dir);
    io::write_lane_file(dir / "demo.json", scenes::fit_demo());

    const auto start = std::chrono::steady_clock::now();
    const std::string cmd = std::string(LANEKIT_CLI) + " fit --lanes " + (dir / "demo.json").string() +
                            " --out-dir " + (dir / "out").string() +
                            " --iterations 2000 --lr 0.5 --points-per-lane 4 --log-every 100 >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool ok = status == 0;
    double initial = 0.0, final_total = 0.0;
    if (ok) {
        std::ifstream csv(dir / "out/loss.csv");
        std::string line;
        std::getline(csv, line);  // header
        bool first = true;
        while (std::getline(csv, line)) {
            std::stringstream ss(line);
            std::string field;
            std::vector<double> fields;
            while (std::getline(ss, field, ',')) fields.push_back(std::stod(field));
            if (first) {
                initial = fields[5];
                first = false;
            }
            final_total = fields[5];
        }
        if (!(final_total < 0.01 * initial)) ok = false;

        io::LaneFile fitted = io::read_lane_file(dir / "out/lanes_fit.json");
        io::LaneFile gt = scenes::fit_demo();
        std::vector<Lane> sampled;
        for (const Lane& l : gt.lanes) sampled.push_back(sample_lane(l, scenes::kFitDemoPointsPerLane));
        DecodedLaneSet as_decoded;
        as_decoded.spec = GridSpec(gt.height, gt.width, 8);
        for (const Lane& l : fitted.lanes) {
            DecodedLane dl;
            dl.points = l.points();
            as_decoded.lanes.push_back(dl);
        }
        const double err = recovery_error(as_decoded, sampled);
        if (err < 0.0 || err >= 0.5) ok = false;
    }
    if (seconds >= 60.0) ok = false;

    char buf[160];
    std::snprintf(buf, sizeof(buf), "loss %.3g -> %.3g (%.2f%% of initial), %.1f s", initial, final_total,
                  initial > 0 ? 100.0 * final_total / initial : 0.0, seconds);
    report(8, "fit demo convergence and recovery", ok, buf);
}

void criterion_9_constants() {
    const LossConfig loss;
    const DecoderConfig dec;
    const FitConfig fitc;
    const bool ok = loss.alpha == 2.0 && loss.beta == 4.0 && loss.lambda_point == 1.0 &&
                    loss.lambda_quant == 1.0 && loss.lambda_offset == 0.5 && loss.lambda_aux == 1.0 &&
                    kDefaultSampleCount == 9 && fitc.m_samples == 9 && dec.keypoint_threshold == 0.4 &&
                    dec.theta_dis == 4.0;
    report(9, "published default constants", ok,
           "alpha=2, beta=4, lambdas=(1.0, 1.0, 0.5, 1.0), M=9, threshold=0.4, theta_dis=4");
}

void criterion_10_robustness() {
    const std::array<double, 4> scales{0.0, 0.1, 0.25, 0.5};
    SceneSpec sspec;
    sspec.n_lanes = 4;
    sspec.seed = 7;
    Scene scene = generate(sspec);
    Targets t = encode(scene.lanes, kSpec, kEnc);

    std::array<double, 4> mean{}, se{};
    for (std::size_t s = 0; s < scales.size(); ++s) {
        std::vector<double> acc;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Corruption c;
            c.offset_noise = scales[s];
            Targets noisy = corrupt(t, c, 1000 + seed);
            DecodedLaneSet d = decode(noisy.confidence, noisy.quant, noisy.offsets, DecoderConfig{});
            long correct = 0, total = 0;
            for (const Lane& lane : t.sampled) {
                MapCoords start = to_map_coords(lane.starting_point(), kSpec);
                const DecodedLane* match = nullptr;
                double best = 1e18;
                for (const DecodedLane& dl : d.lanes) {
                    const double dist = std::hypot(dl.center.x - start.mx, dl.center.y - start.my);
                    if (dist < best) {
                        best = dist;
                        match = &dl;
                    }
                }
                for (const Keypoint& p : lane.points()) {
                    ++total;
                    if (match == nullptr || best > 1.0) continue;
                    for (const Keypoint& q : match->points)
                        if (std::hypot(q.x - p.x, q.y - p.y) < 4.0) {
                            ++correct;
                            break;
                        }
                }
            }
            acc.push_back(static_cast<double>(correct) / total);
        }
        double m = 0.0;
        for (double a : acc) m += a;
        m /= acc.size();
        double var = 0.0;
        for (double a : acc) var += (a - m) * (a - m);
        var /= (acc.size() - 1);
        mean[s] = m;
        se[s] = std::sqrt(var / acc.size());
    }

    bool ok = true;
    for (std::size_t s = 1; s < scales.size(); ++s) {
        const double tol = std::sqrt(se[s] * se[s] + se[s - 1] * se[s - 1]);
        if (mean[s] > mean[s - 1] + tol) ok = false;
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf), "mean accuracy %.4f, %.4f, %.4f, %.4f at scales 0, 0.1, 0.25, 0.5",
                  mean[0], mean[1], mean[2], mean[3]);
    report(10, "decoder robustness is non-increasing in noise", ok, buf);
}

}  // namespace

int main() {
    std::printf("acceptance suite (backend: %s)\n", kernels::backend_name().c_str());
    std::vector<CorpusScene> corpus = build_corpus();
    criterion_1_and_2_and_3(corpus);
    criterion_4_matcher();
    criterion_5_gradients();
    criterion_6_minimum(corpus);
    criterion_7_metrics(corpus);
    criterion_8_fit();
    criterion_9_constants();
    criterion_10_robustness();
    if (g_failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
