#include "meshres/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace meshres {

Tape::NodeId Tape::push(int rows, int cols) {
    Node n;
    n.rows = rows;
    n.cols = cols;
    n.val.assign(static_cast<size_t>(rows) * cols, 0.0);
    nodes_.push_back(std::move(n));
    grads_ready_ = false;
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::ensure_grads() {
    for (Node& n : nodes_)
        n.grad.assign(n.val.size(), 0.0);
    grads_ready_ = true;
}

Tape::NodeId Tape::leaf(std::vector<double> values, int rows, int cols) {
    if (values.size() != static_cast<size_t>(rows) * cols)
        throw ShapeError("leaf value count does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    NodeId id = push(rows, cols);
    nodes_[id].val = std::move(values);
    return id;
}

Tape::NodeId Tape::linear(NodeId x, NodeId w, NodeId b) {
    const Node& nx = nodes_[x];
    const Node& nw = nodes_[w];
    const Node& nb = nodes_[b];
    const int rows = nx.rows, cin = nx.cols, cout = nw.cols;
    if (nw.rows != cin || nb.rows != 1 || nb.cols != cout)
        throw ShapeError("linear shape mismatch");

    NodeId y = push(rows, cout);
    {
        double* yv = nodes_[y].val.data();
        const double* xv = nodes_[x].val.data();
        const double* wv = nodes_[w].val.data();
        const double* bv = nodes_[b].val.data();
        for (int r = 0; r < rows; ++r) {
            double* yr = yv + static_cast<size_t>(r) * cout;
            for (int o = 0; o < cout; ++o)
                yr[o] = bv[o];
            const double* xr = xv + static_cast<size_t>(r) * cin;
            for (int i = 0; i < cin; ++i) {
                double xi = xr[i];
                const double* wr = wv + static_cast<size_t>(i) * cout;
                for (int o = 0; o < cout; ++o)
                    yr[o] += xi * wr[o];
            }
        }
    }
    nodes_[y].back = [x, w, b, y, rows, cin, cout](Tape& t) {
        const double* gy = t.nodes_[y].grad.data();
        const double* xv = t.nodes_[x].val.data();
        const double* wv = t.nodes_[w].val.data();
        double* gx = t.nodes_[x].grad.data();
        double* gw = t.nodes_[w].grad.data();
        double* gb = t.nodes_[b].grad.data();
        for (int r = 0; r < rows; ++r) {
            const double* gyr = gy + static_cast<size_t>(r) * cout;
            const double* xr = xv + static_cast<size_t>(r) * cin;
            double* gxr = gx + static_cast<size_t>(r) * cin;
            for (int o = 0; o < cout; ++o)
                gb[o] += gyr[o];
            for (int i = 0; i < cin; ++i) {
                const double* wr = wv + static_cast<size_t>(i) * cout;
                double acc = 0.0;
                for (int o = 0; o < cout; ++o)
                    acc += gyr[o] * wr[o];
                gxr[i] += acc;
                double xi = xr[i];
                double* gwr = gw + static_cast<size_t>(i) * cout;
                for (int o = 0; o < cout; ++o)
                    gwr[o] += xi * gyr[o];
            }
        }
    };
    return y;
}

Tape::NodeId Tape::relu(NodeId x) {
    const Node& nx = nodes_[x];
    NodeId y = push(nx.rows, nx.cols);
    const size_t n = nx.val.size();
    for (size_t i = 0; i < n; ++i)
        nodes_[y].val[i] = nodes_[x].val[i] > 0.0 ? nodes_[x].val[i] : 0.0;
    nodes_[y].back = [x, y, n](Tape& t) {
        const double* xv = t.nodes_[x].val.data();
        const double* gy = t.nodes_[y].grad.data();
        double* gx = t.nodes_[x].grad.data();
        for (size_t i = 0; i < n; ++i)
            if (xv[i] > 0.0)
                gx[i] += gy[i];
    };
    return y;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Node& na = nodes_[a];
    const Node& nb = nodes_[b];
    if (na.rows != nb.rows || na.cols != nb.cols)
        throw ShapeError("add shape mismatch");
    NodeId y = push(na.rows, na.cols);
    const size_t n = na.val.size();
    for (size_t i = 0; i < n; ++i)
        nodes_[y].val[i] = nodes_[a].val[i] + nodes_[b].val[i];
    nodes_[y].back = [a, b, y, n](Tape& t) {
        const double* gy = t.nodes_[y].grad.data();
        double* ga = t.nodes_[a].grad.data();
        double* gb = t.nodes_[b].grad.data();
        for (size_t i = 0; i < n; ++i) {
            ga[i] += gy[i];
            gb[i] += gy[i];
        }
    };
    return y;
}

Tape::NodeId Tape::concat_cols(NodeId a, NodeId b) {
    const Node& na = nodes_[a];
    const Node& nb = nodes_[b];
    if (na.rows != nb.rows)
        throw ShapeError("concat_cols row mismatch");
    const int rows = na.rows, ca = na.cols, cb = nb.cols;
    NodeId y = push(rows, ca + cb);
    for (int r = 0; r < rows; ++r) {
        double* yr = nodes_[y].val.data() + static_cast<size_t>(r) * (ca + cb);
        const double* ar = nodes_[a].val.data() + static_cast<size_t>(r) * ca;
        const double* br = nodes_[b].val.data() + static_cast<size_t>(r) * cb;
        std::copy(ar, ar + ca, yr);
        std::copy(br, br + cb, yr + ca);
    }
    nodes_[y].back = [a, b, y, rows, ca, cb](Tape& t) {
        for (int r = 0; r < rows; ++r) {
            const double* gyr = t.nodes_[y].grad.data() + static_cast<size_t>(r) * (ca + cb);
            double* gar = t.nodes_[a].grad.data() + static_cast<size_t>(r) * ca;
            double* gbr = t.nodes_[b].grad.data() + static_cast<size_t>(r) * cb;
            for (int i = 0; i < ca; ++i)
                gar[i] += gyr[i];
            for (int i = 0; i < cb; ++i)
                gbr[i] += gyr[ca + i];
        }
    };
    return y;
}

Tape::NodeId Tape::gather_rows(NodeId x, std::vector<int> idx) {
    const Node& nx = nodes_[x];
    const int cols = nx.cols;
    const int rows = static_cast<int>(idx.size());
    for (int i : idx)
        if (i < 0 || i >= nx.rows)
            throw ShapeError("gather_rows index out of range");
    NodeId y = push(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const double* src = nodes_[x].val.data() + static_cast<size_t>(idx[r]) * cols;
        std::copy(src, src + cols, nodes_[y].val.data() + static_cast<size_t>(r) * cols);
    }
    nodes_[y].back = [x, y, idx = std::move(idx), rows, cols](Tape& t) {
        const double* gy = t.nodes_[y].grad.data();
        double* gx = t.nodes_[x].grad.data();
        for (int r = 0; r < rows; ++r) {
            double* dst = gx + static_cast<size_t>(idx[r]) * cols;
            const double* src = gy + static_cast<size_t>(r) * cols;
            for (int c = 0; c < cols; ++c)
                dst[c] += src[c];
        }
    };
    return y;
}

Tape::NodeId Tape::sub_center(NodeId g, NodeId c, int k) {
    const Node& ng = nodes_[g];
    const Node& nc = nodes_[c];
    if (ng.cols != nc.cols || ng.rows != nc.rows * k)
        throw ShapeError("sub_center shape mismatch");
    const int m = nc.rows, cols = ng.cols;
    NodeId y = push(ng.rows, cols);
    for (int i = 0; i < m; ++i) {
        const double* cr = nodes_[c].val.data() + static_cast<size_t>(i) * cols;
        for (int j = 0; j < k; ++j) {
            const double* gr = nodes_[g].val.data() + static_cast<size_t>(i * k + j) * cols;
            double* yr = nodes_[y].val.data() + static_cast<size_t>(i * k + j) * cols;
            for (int col = 0; col < cols; ++col)
                yr[col] = gr[col] - cr[col];
        }
    }
    nodes_[y].back = [g, c, y, m, k, cols](Tape& t) {
        const double* gy = t.nodes_[y].grad.data();
        double* gg = t.nodes_[g].grad.data();
        double* gc = t.nodes_[c].grad.data();
        for (int i = 0; i < m; ++i) {
            double* gcr = gc + static_cast<size_t>(i) * cols;
            for (int j = 0; j < k; ++j) {
                const double* gyr = gy + static_cast<size_t>(i * k + j) * cols;
                double* ggr = gg + static_cast<size_t>(i * k + j) * cols;
                for (int col = 0; col < cols; ++col) {
                    ggr[col] += gyr[col];
                    gcr[col] -= gyr[col];
                }
            }
        }
    };
    return y;
}

Tape::NodeId Tape::affine_normalize(NodeId d, NodeId alpha, NodeId beta, double eps) {
    const Node& nd = nodes_[d];
    const int rows = nd.rows, cols = nd.cols;
    if (nodes_[alpha].cols != cols || nodes_[beta].cols != cols || nodes_[alpha].rows != 1 ||
        nodes_[beta].rows != 1)
        throw ShapeError("affine_normalize parameter shape mismatch");

    const size_t n = nd.val.size();
    const double* dv = nd.val.data();
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i)
        mean += dv[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dd = dv[i] - mean;
        var += dd * dd;
    }
    var /= static_cast<double>(n);
    const double sigma = std::sqrt(var);
    const double denom = sigma + eps;

    NodeId y = push(rows, cols);
    {
        const double* av = nodes_[alpha].val.data();
        const double* bv = nodes_[beta].val.data();
        double* yv = nodes_[y].val.data();
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                size_t i = static_cast<size_t>(r) * cols + c;
                yv[i] = av[c] * dv[i] / denom + bv[c];
            }
    }
    nodes_[y].back = [d, alpha, beta, y, rows, cols, n, mean, sigma, denom](Tape& t) {
        const double* gy = t.nodes_[y].grad.data();
        const double* dv = t.nodes_[d].val.data();
        const double* av = t.nodes_[alpha].val.data();
        double* gd = t.nodes_[d].grad.data();
        double* ga = t.nodes_[alpha].grad.data();
        double* gb = t.nodes_[beta].grad.data();

        // dL/dsigma = sum g * alpha_c * d * (-1/denom^2)
        double dl_dsigma = 0.0;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                size_t i = static_cast<size_t>(r) * cols + c;
                ga[c] += gy[i] * dv[i] / denom;
                gb[c] += gy[i];
                gd[i] += gy[i] * av[c] / denom;
                dl_dsigma -= gy[i] * av[c] * dv[i] / (denom * denom);
            }
        // dsigma/dd_i = (d_i - mean) / (n * sigma); skip when sigma ~ 0.
        if (sigma > 1e-300) {
            double s = dl_dsigma / (static_cast<double>(n) * sigma);
            for (size_t i = 0; i < n; ++i)
                gd[i] += s * (dv[i] - mean);
        }
    };
    return y;
}

Tape::NodeId Tape::max_over_groups(NodeId x, int m, int k) {
    const Node& nx = nodes_[x];
    if (nx.rows != m * k)
        throw ShapeError("max_over_groups row mismatch");
    const int cols = nx.cols;
    NodeId y = push(m, cols);
    std::vector<int> argmax(static_cast<size_t>(m) * cols);
    for (int i = 0; i < m; ++i) {
        double* yr = nodes_[y].val.data() + static_cast<size_t>(i) * cols;
        int* am = argmax.data() + static_cast<size_t>(i) * cols;
        const double* base = nodes_[x].val.data() + static_cast<size_t>(i) * k * cols;
        for (int c = 0; c < cols; ++c) {
            yr[c] = base[c];
            am[c] = 0;
        }
        for (int j = 1; j < k; ++j) {
            const double* row = base + static_cast<size_t>(j) * cols;
            for (int c = 0; c < cols; ++c)
                if (row[c] > yr[c]) { // first max wins ties
                    yr[c] = row[c];
                    am[c] = j;
                }
        }
    }
    nodes_[y].back = [x, y, argmax = std::move(argmax), m, k, cols](Tape& t) {
        const double* gy = t.nodes_[y].grad.data();
        double* gx = t.nodes_[x].grad.data();
        for (int i = 0; i < m; ++i)
            for (int c = 0; c < cols; ++c) {
                int j = argmax[static_cast<size_t>(i) * cols + c];
                gx[static_cast<size_t>(i * k + j) * cols + c] +=
                    gy[static_cast<size_t>(i) * cols + c];
            }
    };
    return y;
}

Tape::NodeId Tape::weighted_rows(NodeId x, std::vector<int> nbr, std::vector<double> w, int k) {
    const Node& nx = nodes_[x];
    if (nbr.size() != w.size() || nbr.size() % k != 0)
        throw ShapeError("weighted_rows neighbor/weight mismatch");
    const int rows = static_cast<int>(nbr.size()) / k;
    const int cols = nx.cols;
    for (int i : nbr)
        if (i < 0 || i >= nx.rows)
            throw ShapeError("weighted_rows index out of range");
    NodeId y = push(rows, cols);
    for (int r = 0; r < rows; ++r) {
        double* yr = nodes_[y].val.data() + static_cast<size_t>(r) * cols;
        for (int j = 0; j < k; ++j) {
            const double wj = w[static_cast<size_t>(r) * k + j];
            const double* src =
                nodes_[x].val.data() + static_cast<size_t>(nbr[static_cast<size_t>(r) * k + j]) * cols;
            for (int c = 0; c < cols; ++c)
                yr[c] += wj * src[c];
        }
    }
    nodes_[y].back = [x, y, nbr = std::move(nbr), w = std::move(w), rows, cols, k](Tape& t) {
        const double* gy = t.nodes_[y].grad.data();
        double* gx = t.nodes_[x].grad.data();
        for (int r = 0; r < rows; ++r) {
            const double* gyr = gy + static_cast<size_t>(r) * cols;
            for (int j = 0; j < k; ++j) {
                const double wj = w[static_cast<size_t>(r) * k + j];
                double* dst = gx + static_cast<size_t>(nbr[static_cast<size_t>(r) * k + j]) * cols;
                for (int c = 0; c < cols; ++c)
                    dst[c] += wj * gyr[c];
            }
        }
    };
    return y;
}

Tape::NodeId Tape::cross_entropy(NodeId logits, const std::vector<ClassId>& labels) {
    const Node& nl = nodes_[logits];
    const int rows = nl.rows, cols = nl.cols;
    if (static_cast<int>(labels.size()) != rows)
        throw ShapeError("cross_entropy label count mismatch");
    for (ClassId c : labels)
        if (c >= cols)
            throw RangeError("cross_entropy label out of range");

    // Cache softmax for the backward pass.
    std::vector<double> softmax(static_cast<size_t>(rows) * cols);
    double loss = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* lr = nl.val.data() + static_cast<size_t>(r) * cols;
        double* sr = softmax.data() + static_cast<size_t>(r) * cols;
        double mx = lr[0];
        for (int c = 1; c < cols; ++c)
            mx = std::max(mx, lr[c]);
        double sum = 0.0;
        for (int c = 0; c < cols; ++c) {
            sr[c] = std::exp(lr[c] - mx);
            sum += sr[c];
        }
        double log_sum = std::log(sum);
        for (int c = 0; c < cols; ++c)
            sr[c] /= sum;
        loss += -(lr[labels[r]] - mx - log_sum);
    }
    loss /= static_cast<double>(rows);

    NodeId y = push(1, 1);
    nodes_[y].val[0] = loss;
    nodes_[y].back = [logits, y, softmax = std::move(softmax), labels, rows, cols](Tape& t) {
        const double g = t.nodes_[y].grad[0] / static_cast<double>(rows);
        double* gl = t.nodes_[logits].grad.data();
        for (int r = 0; r < rows; ++r) {
            const double* sr = softmax.data() + static_cast<size_t>(r) * cols;
            double* glr = gl + static_cast<size_t>(r) * cols;
            for (int c = 0; c < cols; ++c)
                glr[c] += g * (sr[c] - (c == labels[r] ? 1.0 : 0.0));
        }
    };
    return y;
}

void Tape::backward(NodeId loss) {
    if (nodes_[loss].val.size() != 1)
        throw ShapeError("backward expects a scalar loss node");
    ensure_grads();
    nodes_[loss].grad[0] = 1.0;
    for (NodeId id = loss; id >= 0; --id)
        if (nodes_[id].back)
            nodes_[id].back(*this);
}

Tape::NodeId register_param(Tape& tape, Tensor& param) {
    int rows = 1, cols = 1;
    if (param.shape.size() == 1) {
        cols = param.shape[0];
    } else if (param.shape.size() == 2) {
        rows = param.shape[0];
        cols = param.shape[1];
    } else {
        throw ShapeError("parameters must be rank 1 or 2");
    }
    param.node = tape.leaf(param.values, rows, cols);
    return param.node;
}

void fetch_grad(const Tape& tape, Tensor& param) {
    if (param.node < 0)
        throw ShapeError("parameter was not registered on this tape");
    param.grad = tape.grad(param.node);
}

} // namespace meshres
