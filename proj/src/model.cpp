#include "meshres/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "meshres/kdtree.hpp"
#include "meshres/rng.hpp"

namespace meshres {

void ModelConfig::validate() const {
    if (stages < 1)
        throw ConfigError("stages must be >= 1");
    if (static_cast<int>(channels.size()) != stages ||
        static_cast<int>(center_fractions.size()) != stages)
        throw ConfigError("channels and center_fractions must list one entry per stage");
    for (int c : channels)
        if (c < 1)
            throw ConfigError("channel widths must be positive");
    for (size_t s = 0; s + 1 < center_fractions.size(); ++s)
        if (center_fractions[s + 1] > center_fractions[s])
            throw ConfigError("center fractions must be non-increasing across stages");
    for (double f : center_fractions)
        if (f <= 0.0 || f > 1.0)
            throw ConfigError("center fractions must lie in (0, 1]");
    if (k_neighbors < 1 || pre_blocks < 0 || pos_blocks < 0)
        throw ConfigError("invalid neighbor/block counts");
    if (num_classes < 2 || input_dims < 1)
        throw ConfigError("invalid class or input dims");
}

std::string ModelConfig::to_json() const {
    nlohmann::json j;
    j["stages"] = stages;
    j["channels"] = channels;
    j["center_fractions"] = center_fractions;
    j["k_neighbors"] = k_neighbors;
    j["pre_blocks"] = pre_blocks;
    j["pos_blocks"] = pos_blocks;
    j["num_classes"] = num_classes;
    j["input_dims"] = input_dims;
    j["affine_eps"] = affine_eps;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    ModelConfig c;
    c.stages = j.value("stages", c.stages);
    if (j.contains("channels"))
        c.channels = j["channels"].get<std::vector<int>>();
    if (j.contains("center_fractions"))
        c.center_fractions = j["center_fractions"].get<std::vector<double>>();
    c.k_neighbors = j.value("k_neighbors", c.k_neighbors);
    c.pre_blocks = j.value("pre_blocks", c.pre_blocks);
    c.pos_blocks = j.value("pos_blocks", c.pos_blocks);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.input_dims = j.value("input_dims", c.input_dims);
    c.affine_eps = j.value("affine_eps", c.affine_eps);
    c.validate();
    return c;
}

std::string TrainConfig::to_json() const {
    nlohmann::json j;
    j["epochs"] = epochs;
    j["lr0"] = lr0;
    j["lr_step"] = lr_step;
    j["lr_gamma"] = lr_gamma;
    j["batch_size"] = batch_size;
    j["seed"] = seed;
    return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.lr0 = j.value("lr0", c.lr0);
    c.lr_step = j.value("lr_step", c.lr_step);
    c.lr_gamma = j.value("lr_gamma", c.lr_gamma);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    if (c.epochs < 0 || c.lr0 < 0 || c.lr_step < 1 || c.lr_gamma <= 0 || c.lr_gamma > 1 ||
        c.batch_size < 1)
        throw ConfigError("invalid train config values");
    return c;
}

Tensor& ModelParams::at(const std::string& name) {
    for (auto& [n, t] : tensors)
        if (n == name)
            return t;
    throw ConfigError("no parameter named " + name);
}

const Tensor& ModelParams::at(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name)
            return t;
    throw ConfigError("no parameter named " + name);
}

namespace {

int width_at_level(const ModelConfig& cfg, int level) {
    return level == 0 ? cfg.channels[0] : cfg.channels[level - 1];
}

int stage_in_width(const ModelConfig& cfg, int s) {
    return s == 0 ? cfg.channels[0] : cfg.channels[s - 1];
}

} // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    ModelParams p;
    p.config = config;
    Rng rng(seed ^ 0x5eedULL);

    auto add_matrix = [&](const std::string& name, int rows, int cols) {
        Tensor t;
        t.shape = {rows, cols};
        t.values.resize(static_cast<size_t>(rows) * cols);
        double bound = std::sqrt(6.0 / rows);
        for (double& v : t.values)
            v = rng.uniform(-bound, bound);
        p.tensors.emplace_back(name, std::move(t));
    };
    auto add_vector = [&](const std::string& name, int cols, double fill) {
        Tensor t;
        t.shape = {cols};
        t.values.assign(cols, fill);
        p.tensors.emplace_back(name, std::move(t));
    };
    auto add_block = [&](const std::string& prefix, int width) {
        add_matrix(prefix + ".fc1.w", width, width);
        add_vector(prefix + ".fc1.b", width, 0.0);
        add_matrix(prefix + ".fc2.w", width, width);
        add_vector(prefix + ".fc2.b", width, 0.0);
    };

    add_matrix("embed.w", config.input_dims, config.channels[0]);
    add_vector("embed.b", config.channels[0], 0.0);

    for (int s = 0; s < config.stages; ++s) {
        const std::string st = "stage" + std::to_string(s);
        int win = stage_in_width(config, s);
        int wout = config.channels[s];
        add_vector(st + ".alpha", win, 1.0);
        add_vector(st + ".beta", win, 0.0);
        add_matrix(st + ".raise.w", win, wout);
        add_vector(st + ".raise.b", wout, 0.0);
        for (int j = 0; j < config.pre_blocks; ++j)
            add_block(st + ".pre" + std::to_string(j), wout);
        for (int j = 0; j < config.pos_blocks; ++j)
            add_block(st + ".pos" + std::to_string(j), wout);
    }

    for (int lvl = config.stages - 1; lvl >= 0; --lvl) {
        int win = width_at_level(config, lvl + 1) + width_at_level(config, lvl);
        int wout = width_at_level(config, lvl);
        add_matrix("fp" + std::to_string(lvl) + ".w", win, wout);
        add_vector("fp" + std::to_string(lvl) + ".b", wout, 0.0);
    }

    int head_w = width_at_level(config, 0);
    add_matrix("head.fc1.w", head_w, head_w);
    add_vector("head.fc1.b", head_w, 0.0);
    add_matrix("head.fc2.w", head_w, config.num_classes);
    add_vector("head.fc2.b", config.num_classes, 0.0);
    return p;
}

std::vector<int> fps(const std::vector<Vec3>& points, int m) {
    const int n = static_cast<int>(points.size());
    if (m < 1 || m > n)
        throw RangeError("fps m out of range");
    std::vector<int> chosen;
    chosen.reserve(m);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    int current = 0;
    chosen.push_back(0);
    for (int step = 1; step < m; ++step) {
        const Vec3& c = points[current];
        int best = -1;
        double best_d2 = -1.0;
        for (int i = 0; i < n; ++i) {
            double d2 = distance_sq(points[i], c);
            if (d2 < min_d2[i])
                min_d2[i] = d2;
            if (min_d2[i] > best_d2) { // strict: ties keep the smallest index
                best_d2 = min_d2[i];
                best = i;
            }
        }
        chosen.push_back(best);
        current = best;
    }
    return chosen;
}

std::vector<std::vector<int>> knn(const std::vector<Vec3>& points,
                                  const std::vector<Vec3>& queries, int k) {
    if (k < 1 || k > static_cast<int>(points.size()))
        throw RangeError("knn k out of range");
    KdTree tree(points);
    std::vector<std::vector<int>> out(queries.size());
    for (size_t i = 0; i < queries.size(); ++i)
        out[i] = tree.query(queries[i], k);
    return out;
}

std::vector<double> geometric_affine(const std::vector<double>& group_feats,
                                     const std::vector<double>& center_feats, int m, int k,
                                     int c, const std::vector<double>& alpha,
                                     const std::vector<double>& beta, double eps) {
    if (group_feats.size() != static_cast<size_t>(m) * k * c ||
        center_feats.size() != static_cast<size_t>(m) * c ||
        alpha.size() != static_cast<size_t>(c) || beta.size() != static_cast<size_t>(c))
        throw ShapeError("geometric_affine shape mismatch");
    Tape tape;
    auto g = tape.leaf(group_feats, m * k, c);
    auto cn = tape.leaf(center_feats, m, c);
    auto a = tape.leaf(alpha, 1, c);
    auto b = tape.leaf(beta, 1, c);
    auto d = tape.sub_center(g, cn, k);
    auto y = tape.affine_normalize(d, a, b, eps);
    return tape.values(y);
}

GroupingPlan build_grouping(const std::vector<Vec3>& cell_positions, const ModelConfig& config) {
    config.validate();
    const int n = static_cast<int>(cell_positions.size());
    if (n < 1)
        throw ShapeError("no cells to group");

    GroupingPlan plan;
    plan.n_cells = n;
    std::vector<std::vector<Vec3>> level_pts;
    level_pts.push_back(cell_positions);

    for (int s = 0; s < config.stages; ++s) {
        const std::vector<Vec3>& pts = level_pts[s];
        int m = std::max(1, static_cast<int>(std::llround(config.center_fractions[s] * n)));
        if (m > static_cast<int>(pts.size()))
            throw ShapeError("stage " + std::to_string(s) + " wants " + std::to_string(m) +
                             " centers from " + std::to_string(pts.size()) + " points");
        std::vector<int> centers = fps(pts, m);
        std::vector<Vec3> center_pts(m);
        for (int i = 0; i < m; ++i)
            center_pts[i] = pts[centers[i]];

        // Tiny inputs can hold fewer points than k; shrink the neighborhood.
        int k_eff = std::min(config.k_neighbors, static_cast<int>(pts.size()));
        std::vector<std::vector<int>> nbrs = knn(pts, center_pts, k_eff);
        std::vector<int> flat;
        flat.reserve(static_cast<size_t>(m) * k_eff);
        for (const auto& row : nbrs)
            flat.insert(flat.end(), row.begin(), row.end());

        plan.centers.push_back(std::move(centers));
        plan.group_nbrs.push_back(std::move(flat));
        plan.group_k.push_back(k_eff);
        level_pts.push_back(std::move(center_pts));
    }

    for (int lvl = 0; lvl < config.stages; ++lvl) {
        const std::vector<Vec3>& dst = level_pts[lvl];
        const std::vector<Vec3>& src = level_pts[lvl + 1];
        int kp = std::min(3, static_cast<int>(src.size()));
        std::vector<std::vector<int>> nn = knn(src, dst, kp);
        std::vector<int> flat;
        std::vector<double> weights;
        flat.reserve(dst.size() * kp);
        weights.reserve(dst.size() * kp);
        for (size_t i = 0; i < dst.size(); ++i) {
            double sum = 0.0;
            double w[3];
            for (int j = 0; j < kp; ++j) {
                double d2 = distance_sq(dst[i], src[nn[i][j]]);
                w[j] = 1.0 / (d2 + 1e-8);
                sum += w[j];
            }
            for (int j = 0; j < kp; ++j) {
                flat.push_back(nn[i][j]);
                weights.push_back(w[j] / sum);
            }
        }
        plan.prop_nbrs.push_back(std::move(flat));
        plan.prop_w.push_back(std::move(weights));
        plan.prop_k.push_back(kp);
    }
    return plan;
}

namespace {

struct ForwardPass {
    Tape tape;
    std::vector<Tape::NodeId> param_nodes; // parallel to params.tensors
    Tape::NodeId logits = -1;
};

Tape::NodeId param_node(const ModelParams& params, const ForwardPass& fp,
                        const std::string& name) {
    for (size_t i = 0; i < params.tensors.size(); ++i)
        if (params.tensors[i].first == name)
            return fp.param_nodes[i];
    throw ConfigError("no parameter named " + name);
}

ForwardPass make_forward(const FeatureMatrix& features, const ModelParams& params,
                         const GroupingPlan& plan) {
    const ModelConfig& cfg = params.config;
    const int n = static_cast<int>(features.rows);
    if (n != plan.n_cells)
        throw ShapeError("grouping plan was built for a different cell count");
    if (n < 1)
        throw ShapeError("empty feature matrix");

    ForwardPass fp;
    Tape& t = fp.tape;
    fp.param_nodes.reserve(params.tensors.size());
    for (const auto& [name, tensor] : params.tensors) {
        int rows = tensor.shape.size() == 2 ? tensor.shape[0] : 1;
        int cols = tensor.shape.size() == 2 ? tensor.shape[1] : tensor.shape[0];
        fp.param_nodes.push_back(t.leaf(tensor.values, rows, cols));
    }
    auto P = [&](const std::string& name) { return param_node(params, fp, name); };

    auto res_block = [&](Tape::NodeId x, const std::string& prefix) {
        auto h = t.relu(t.linear(x, P(prefix + ".fc1.w"), P(prefix + ".fc1.b")));
        auto y = t.linear(h, P(prefix + ".fc2.w"), P(prefix + ".fc2.b"));
        return t.relu(t.add(x, y));
    };

    auto feats = t.leaf(features.data, n, kFeatureDims);
    std::vector<Tape::NodeId> level;
    level.push_back(t.relu(t.linear(feats, P("embed.w"), P("embed.b"))));

    for (int s = 0; s < cfg.stages; ++s) {
        const std::string st = "stage" + std::to_string(s);
        const int m = static_cast<int>(plan.centers[s].size());
        const int k = plan.group_k[s];
        auto grouped = t.gather_rows(level[s], plan.group_nbrs[s]);
        auto centers = t.gather_rows(level[s], plan.centers[s]);
        auto d = t.sub_center(grouped, centers, k);
        auto a = t.affine_normalize(d, P(st + ".alpha"), P(st + ".beta"), cfg.affine_eps);
        auto h = t.relu(t.linear(a, P(st + ".raise.w"), P(st + ".raise.b")));
        for (int j = 0; j < cfg.pre_blocks; ++j)
            h = res_block(h, st + ".pre" + std::to_string(j));
        auto pooled = t.max_over_groups(h, m, k);
        for (int j = 0; j < cfg.pos_blocks; ++j)
            pooled = res_block(pooled, st + ".pos" + std::to_string(j));
        level.push_back(pooled);
    }

    auto dec = level[cfg.stages];
    for (int lvl = cfg.stages - 1; lvl >= 0; --lvl) {
        auto up = t.weighted_rows(dec, plan.prop_nbrs[lvl], plan.prop_w[lvl], plan.prop_k[lvl]);
        auto cat = t.concat_cols(up, level[lvl]);
        const std::string fpn = "fp" + std::to_string(lvl);
        dec = t.relu(t.linear(cat, P(fpn + ".w"), P(fpn + ".b")));
    }

    auto h = t.relu(t.linear(dec, P("head.fc1.w"), P("head.fc1.b")));
    fp.logits = t.linear(h, P("head.fc2.w"), P("head.fc2.b"));
    return fp;
}

std::vector<Vec3> feature_barycenters(const FeatureMatrix& features) {
    std::vector<Vec3> out(features.rows);
    for (size_t i = 0; i < features.rows; ++i)
        out[i] = features.point(i, kColBary);
    return out;
}

} // namespace

std::vector<double> forward(const FeatureMatrix& features, const ModelParams& params,
                            const GroupingPlan& plan) {
    ForwardPass fp = make_forward(features, params, plan);
    return fp.tape.values(fp.logits);
}

std::vector<double> forward(const FeatureMatrix& features, const ModelParams& params) {
    GroupingPlan plan = build_grouping(feature_barycenters(features), params.config);
    return forward(features, params, plan);
}

double loss_ce(const std::vector<double>& logits, int num_classes,
               const std::vector<ClassId>& labels) {
    if (logits.size() != labels.size() * static_cast<size_t>(num_classes))
        throw ShapeError("loss_ce shape mismatch");
    double loss = 0.0;
    for (size_t r = 0; r < labels.size(); ++r) {
        const double* lr = logits.data() + r * num_classes;
        if (labels[r] >= num_classes)
            throw RangeError("label out of range");
        double mx = lr[0];
        for (int c = 1; c < num_classes; ++c)
            mx = std::max(mx, lr[c]);
        double sum = 0.0;
        for (int c = 0; c < num_classes; ++c)
            sum += std::exp(lr[c] - mx);
        loss += -(lr[labels[r]] - mx - std::log(sum));
    }
    return loss / static_cast<double>(labels.size());
}

void adam_step(ModelParams& params, AdamState& state, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (state.m.empty()) {
        state.m.resize(params.tensors.size());
        state.v.resize(params.tensors.size());
        for (size_t i = 0; i < params.tensors.size(); ++i) {
            state.m[i].assign(params.tensors[i].second.values.size(), 0.0);
            state.v[i].assign(params.tensors[i].second.values.size(), 0.0);
        }
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.tensors.size(); ++i) {
        Tensor& p = params.tensors[i].second;
        if (p.grad.size() != p.values.size())
            throw ShapeError("missing gradient for " + params.tensors[i].first);
        for (size_t j = 0; j < p.values.size(); ++j) {
            double g = p.grad[j];
            state.m[i][j] = beta1 * state.m[i][j] + (1.0 - beta1) * g;
            state.v[i][j] = beta2 * state.v[i][j] + (1.0 - beta2) * g * g;
            double mhat = state.m[i][j] / bc1;
            double vhat = state.v[i][j] / bc2;
            p.values[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

double lr_schedule(int epoch, const TrainConfig& config) {
    if (epoch < 0)
        throw RangeError("epoch must be >= 0");
    int drops = epoch / config.lr_step;
    return config.lr0 * std::pow(config.lr_gamma, static_cast<double>(drops));
}

std::pair<ModelParams, TrainHistory> train(const std::vector<LabeledFeatures>& train_set,
                                           const std::vector<LabeledFeatures>& val_set,
                                           const ModelConfig& model_config,
                                           const TrainConfig& train_config) {
    if (train_set.empty())
        throw ConfigError("empty training set");
    const size_t n_cells = train_set.front().features.rows;
    auto check = [&](const LabeledFeatures& lf) {
        if (lf.features.rows != n_cells)
            throw ConfigError("all surfaces must share the same cell count");
        if (lf.labels.size() != lf.features.rows)
            throw ConfigError("labels do not match feature rows");
    };
    for (const auto& lf : train_set)
        check(lf);
    for (const auto& lf : val_set)
        check(lf);

    std::vector<GroupingPlan> train_plans, val_plans;
    train_plans.reserve(train_set.size());
    for (const auto& lf : train_set)
        train_plans.push_back(build_grouping(feature_barycenters(lf.features), model_config));
    val_plans.reserve(val_set.size());
    for (const auto& lf : val_set)
        val_plans.push_back(build_grouping(feature_barycenters(lf.features), model_config));

    ModelParams params = init_params(model_config, train_config.seed);
    AdamState adam;
    Rng shuffle_rng(train_config.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainHistory history;
    ModelParams best = params;
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;

    std::vector<std::vector<double>> grad_acc(params.tensors.size());

    for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, train_config);
        // Fisher-Yates with the shared stream keeps runs reproducible.
        for (size_t i = order.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(shuffle_rng.next_below(i));
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += train_config.batch_size) {
            size_t stop = std::min(order.size(), start + train_config.batch_size);
            for (size_t i = 0; i < params.tensors.size(); ++i)
                grad_acc[i].assign(params.tensors[i].second.values.size(), 0.0);

            for (size_t bi = start; bi < stop; ++bi) {
                const LabeledFeatures& lf = train_set[order[bi]];
                ForwardPass fp =
                    make_forward(lf.features, params, train_plans[order[bi]]);
                auto loss_node = fp.tape.cross_entropy(fp.logits, lf.labels);
                fp.tape.backward(loss_node);
                epoch_loss += fp.tape.values(loss_node)[0];
                ++seen;
                for (size_t i = 0; i < params.tensors.size(); ++i) {
                    const std::vector<double>& g = fp.tape.grad(fp.param_nodes[i]);
                    for (size_t j = 0; j < g.size(); ++j)
                        grad_acc[i][j] += g[j];
                }
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (size_t i = 0; i < params.tensors.size(); ++i) {
                Tensor& p = params.tensors[i].second;
                p.grad.resize(p.values.size());
                for (size_t j = 0; j < p.grad.size(); ++j)
                    p.grad[j] = grad_acc[i][j] * inv;
            }
            adam_step(params, adam, lr);
        }
        history.train_loss.push_back(epoch_loss / static_cast<double>(seen));

        if (!val_set.empty()) {
            double val_loss = 0.0;
            for (size_t i = 0; i < val_set.size(); ++i) {
                std::vector<double> logits = forward(val_set[i].features, params, val_plans[i]);
                val_loss += loss_ce(logits, model_config.num_classes, val_set[i].labels);
            }
            val_loss /= static_cast<double>(val_set.size());
            history.val_loss.push_back(val_loss);
            if (val_loss < best_val) {
                best_val = val_loss;
                best = params;
                history.best_epoch = epoch;
            }
        }
    }

    if (val_set.empty()) {
        best = params;
        history.best_epoch = train_config.epochs - 1;
    }
    return {std::move(best), std::move(history)};
}

Prediction predict(const ModelParams& params, const FeatureMatrix& features) {
    std::vector<double> logits = forward(features, params);
    const int c = params.config.num_classes;
    Prediction out;
    out.labels.resize(features.rows);
    out.probabilities.resize(logits.size());
    for (size_t r = 0; r < features.rows; ++r) {
        const double* lr = logits.data() + r * c;
        double* pr = out.probabilities.data() + r * c;
        double mx = lr[0];
        for (int i = 1; i < c; ++i)
            mx = std::max(mx, lr[i]);
        double sum = 0.0;
        for (int i = 0; i < c; ++i) {
            pr[i] = std::exp(lr[i] - mx);
            sum += pr[i];
        }
        int arg = 0;
        for (int i = 0; i < c; ++i) {
            pr[i] /= sum;
            if (pr[i] > pr[arg]) // strict: ties keep the smaller class id
                arg = i;
        }
        out.labels[r] = static_cast<ClassId>(arg);
    }
    return out;
}

InferenceTiming measure_inference(const ModelParams& params, const FeatureMatrix& features,
                                  int repeats) {
    if (repeats < 3)
        throw RangeError("repeats must be >= 3");
    InferenceTiming timing;
    timing.repeats = repeats;
    timing.cells = static_cast<int>(features.rows);

    auto run_once = [&]() {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<double> logits = forward(features, params);
        auto t1 = std::chrono::steady_clock::now();
        // keep the compiler honest about the result
        volatile double sink = logits[0];
        (void)sink;
        return std::chrono::duration<double, std::milli>(t1 - t0).count();
    };

    run_once(); // warm-up, excluded
    std::vector<double> times(repeats);
    for (int i = 0; i < repeats; ++i)
        times[i] = run_once();
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : times)
        sum += v;
    timing.mean_ms = sum / repeats;
    timing.p50_ms = sorted[(repeats - 1) / 2];
    timing.min_ms = sorted.front();
    return timing;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write("MRCK", 4);
    std::uint32_t version = params.version;
    out.write(reinterpret_cast<const char*>(&version), 4);
    std::string cfg = params.config.to_json();
    std::uint32_t cfg_len = static_cast<std::uint32_t>(cfg.size());
    out.write(reinterpret_cast<const char*>(&cfg_len), 4);
    out.write(cfg.data(), cfg_len);
    std::uint32_t count = static_cast<std::uint32_t>(params.tensors.size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& [name, tensor] : params.tensors) {
        std::uint32_t name_len = static_cast<std::uint32_t>(name.size());
        out.write(reinterpret_cast<const char*>(&name_len), 4);
        out.write(name.data(), name_len);
        std::uint32_t rank = static_cast<std::uint32_t>(tensor.shape.size());
        out.write(reinterpret_cast<const char*>(&rank), 4);
        for (int d : tensor.shape) {
            std::uint64_t dim = static_cast<std::uint64_t>(d);
            out.write(reinterpret_cast<const char*>(&dim), 8);
        }
        out.write(reinterpret_cast<const char*>(tensor.values.data()),
                  static_cast<std::streamsize>(tensor.values.size() * sizeof(double)));
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MRCK", 4) != 0)
        throw ParseError(path.string() + ": bad MRCK magic");
    ModelParams params;
    in.read(reinterpret_cast<char*>(&params.version), 4);
    std::uint32_t cfg_len = 0;
    in.read(reinterpret_cast<char*>(&cfg_len), 4);
    std::string cfg(cfg_len, '\0');
    in.read(cfg.data(), cfg_len);
    if (!in)
        throw ParseError(path.string() + ": truncated config");
    params.config = ModelConfig::from_json(cfg);
    std::uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t name_len = 0;
        in.read(reinterpret_cast<char*>(&name_len), 4);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        std::uint32_t rank = 0;
        in.read(reinterpret_cast<char*>(&rank), 4);
        if (!in || rank > 2)
            throw ParseError(path.string() + ": bad tensor header");
        Tensor t;
        size_t total = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            std::uint64_t dim = 0;
            in.read(reinterpret_cast<char*>(&dim), 8);
            t.shape.push_back(static_cast<int>(dim));
            total *= dim;
        }
        t.values.resize(total);
        in.read(reinterpret_cast<char*>(t.values.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
        if (!in)
            throw ParseError(path.string() + ": truncated tensor values");
        params.tensors.emplace_back(std::move(name), std::move(t));
    }
    return params;
}

} // namespace meshres
