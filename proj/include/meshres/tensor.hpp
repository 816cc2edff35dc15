// Minimal reverse-mode autodiff over 2D row-major buffers. A forward pass
// records nodes on a tape; backward() replays them in reverse. Every tensor
// here is rows x cols (scalars are 1x1); grouped point sets are flattened to
// (groups*k) x channels.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "meshres/error.hpp"
#include "meshres/mesh.hpp"

namespace meshres {

// Parameter container: raw values plus the gradient filled in by backward()
// and the tape node the parameter was registered under for the current pass.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;
    int node = -1;

    size_t size() const {
        size_t n = 1;
        for (int d : shape)
            n *= static_cast<size_t>(d);
        return n;
    }
};

class Tape {
public:
    using NodeId = int;

    NodeId leaf(std::vector<double> values, int rows, int cols);

    // y = x * w + b; x: R x Cin, w: Cin x Cout, b: 1 x Cout
    NodeId linear(NodeId x, NodeId w, NodeId b);
    NodeId relu(NodeId x);
    NodeId add(NodeId a, NodeId b);
    NodeId concat_cols(NodeId a, NodeId b);

    // out[i] = x[idx[i]]
    NodeId gather_rows(NodeId x, std::vector<int> idx);

    // d[m*k + j] = g[m*k + j] - c[m]
    NodeId sub_center(NodeId g, NodeId c, int k);

    // y = alpha * d / (sigma + eps) + beta, sigma = population std of all of
    // d's entries. alpha, beta: 1 x C.
    NodeId affine_normalize(NodeId d, NodeId alpha, NodeId beta, double eps);

    // x: (m*k) x C -> m x C, channel-wise max over each group's k rows.
    NodeId max_over_groups(NodeId x, int m, int k);

    // out[i] = sum_j w[i*k + j] * x[nbr[i*k + j]]; constant weights.
    NodeId weighted_rows(NodeId x, std::vector<int> nbr, std::vector<double> w, int k);

    // mean over rows of -log softmax(logits)[label]; scalar output.
    NodeId cross_entropy(NodeId logits, const std::vector<ClassId>& labels);

    void backward(NodeId loss);

    const std::vector<double>& values(NodeId id) const { return nodes_[id].val; }
    const std::vector<double>& grad(NodeId id) const { return nodes_[id].grad; }
    int rows(NodeId id) const { return nodes_[id].rows; }
    int cols(NodeId id) const { return nodes_[id].cols; }

private:
    struct Node {
        int rows = 0, cols = 0;
        std::vector<double> val;
        std::vector<double> grad;
        std::function<void(Tape&)> back; // empty for leaves
    };

    NodeId push(int rows, int cols);
    void ensure_grads();

    std::vector<Node> nodes_;
    bool grads_ready_ = false;
};

// Registers the parameter as a leaf and remembers the node id on it.
Tape::NodeId register_param(Tape& tape, Tensor& param);

// Copies the accumulated gradient back into the parameter.
void fetch_grad(const Tape& tape, Tensor& param);

} // namespace meshres
