#pragma once

#include "rng.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace uwjsa::neural {

struct Arch {
    int input = 0;
    int hidden = 64;
    int actions = 7;

    bool operator==(const Arch&) const = default;
};

struct Slice {
    std::string name;
    std::size_t offset = 0;
    int rows = 0, cols = 0; // cols == 1 for biases

    std::size_t count() const { return static_cast<std::size_t>(rows) * cols; }
};

// Q-network: input -> FC(hidden, ReLU) -> GRU(hidden) -> FC(hidden, ReLU) ->
// linear head over the action set. Parameters live in one flat vector with
// named slices; all arithmetic is in S (float in production, double for the
// finite-difference oracle in tests).
//
// GRU cell, gates stacked [z | r | n], single input-side bias:
//   gx = Wx a1 + b,  gh = Wh h
//   z = sigmoid(gx_z + gh_z), r = sigmoid(gx_r + gh_r)
//   n = tanh(gx_n + r .* gh_n)
//   h' = (1 - z) .* n + z .* h
template <class S>
class Net {
  public:
    explicit Net(Arch arch); // zero parameters

    static Net init(Arch arch, Rng& rng); // fan-in
    static Net from_params(Arch arch, std::vector<S> params);

    const Arch& arch() const { return arch_; }
    const std::vector<Slice>& slices() const { return slices_; }
    std::vector<S>& params() { return params_; }
    const std::vector<S>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    // One slot for one agent. `hidden` (size hidden) is updated in place,
    // `q_out` (size actions) receives the Q-values.
    void forward_step(std::span<const S> obs, std::span<S> hidden, std::span<S> q_out) const;

    // Batched sequence forward over `rows` parallel streams and `steps`
    // slots, keeping every activation for backpropagation through time.
    // obs is slot-major: obs[(t * rows + r) * input + i].
    struct Cache {
        int rows = 0, steps = 0;
        std::vector<S> obs;     // steps x rows x input
        std::vector<S> a1;      // steps x rows x hidden
        std::vector<S> gh;      // steps x rows x 3*hidden
        std::vector<S> z, r, n; // steps x rows x hidden
        std::vector<S> h;       // (steps+1) x rows x hidden, h[0] = 0
        std::vector<S> a2;      // steps x rows x hidden
        std::vector<S> q;       // steps x rows x actions
    };
    Cache forward_seq(std::vector<S> obs, int rows, int steps) const;

    // Exact gradient of any loss whose derivative w.r.t. the Q outputs is
    // given in dq (same layout as Cache::q).
    std::vector<S> backward_seq(const Cache& cache, std::span<const S> dq) const;

  private:
    void build_slices();
    const S* slice_ptr(int which) const;
    S* slice_ptr(int which);

    Arch arch_;
    std::vector<Slice> slices_;
    std::vector<S> params_;
};

// Adaptive-moment optimizer with bias correction.
template <class S>
class AdamOptimizer {
  public:
    AdamOptimizer(std::size_t n_params, double learning_rate, double beta1 = 0.9,
                  double beta2 = 0.999, double epsilon = 1e-8);

    void step(std::vector<S>& params, std::span<const S> grad);

    long step_count() const { return steps_; }
    double learning_rate() const { return lr_; }

  private:
    std::vector<S> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long steps_ = 0;
};

using PolicyNet = Net<float>;

} // namespace uwjsa::neural
