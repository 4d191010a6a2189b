#include "neural.hpp"

#include <cmath>
#include <stdexcept>

namespace uwjsa::neural {

namespace {

enum SliceId { kFc1W, kFc1B, kGruWx, kGruWh, kGruB, kFc2W, kFc2B, kHeadW, kHeadB, kSliceCount };

template <class S> S sigmoid(S x) { return S(1) / (S(1) + std::exp(-x)); }

// y[rows x out] = x[rows x in] * wT[in x out] + bias (wT pre-transposed so the
// inner loop runs over contiguous memory).
template <class S>
void affine_rows(const S* x, int rows, int in, const S* w_t, const S* bias, S* y, int out) {
    for (int r = 0; r < rows; ++r) {
        S* yr = y + static_cast<std::size_t>(r) * out;
        if (bias) {
            for (int o = 0; o < out; ++o) yr[o] = bias[o];
        } else {
            for (int o = 0; o < out; ++o) yr[o] = S(0);
        }
        const S* xr = x + static_cast<std::size_t>(r) * in;
        for (int i = 0; i < in; ++i) {
            S xv = xr[i];
            const S* wrow = w_t + static_cast<std::size_t>(i) * out;
            for (int o = 0; o < out; ++o) yr[o] += xv * wrow[o];
        }
    }
}

// dx[rows x in] += dy[rows x out] * w[out x in]
template <class S>
void backprop_rows(const S* dy, int rows, int out, const S* w, S* dx, int in) {
    for (int r = 0; r < rows; ++r) {
        const S* dyr = dy + static_cast<std::size_t>(r) * out;
        S* dxr = dx + static_cast<std::size_t>(r) * in;
        for (int o = 0; o < out; ++o) {
            S g = dyr[o];
            const S* wrow = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) dxr[i] += g * wrow[i];
        }
    }
}

// dw[out x in] += dy[rows x out]^T * x[rows x in]; db[out] += column sums.
template <class S>
void weight_grad_rows(const S* dy, const S* x, int rows, int out, int in, S* dw, S* db) {
    for (int r = 0; r < rows; ++r) {
        const S* dyr = dy + static_cast<std::size_t>(r) * out;
        const S* xr = x + static_cast<std::size_t>(r) * in;
        for (int o = 0; o < out; ++o) {
            S g = dyr[o];
            if (g == S(0)) continue;
            S* dwrow = dw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) dwrow[i] += g * xr[i];
            if (db) db[o] += g;
        }
    }
}

template <class S>
std::vector<S> transpose(const S* w, int rows, int cols) {
    std::vector<S> t(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            t[static_cast<std::size_t>(c) * rows + r] = w[static_cast<std::size_t>(r) * cols + c];
        }
    }
    return t;
}

} // namespace

template <class S>
Net<S>::Net(Arch arch) : arch_(arch) {
    if (arch_.input < 1 || arch_.hidden < 1 || arch_.actions < 1) {
        throw std::invalid_argument("Net: architecture dimensions must be positive");
    }
    build_slices();
    params_.assign(slices_.back().offset + slices_.back().count(), S(0));
}

template <class S>
void Net<S>::build_slices() {
    int in = arch_.input, h = arch_.hidden, a = arch_.actions;
    slices_.clear();
    std::size_t off = 0;
    auto add = [&](const char* name, int rows, int cols) {
        slices_.push_back({name, off, rows, cols});
        off += slices_.back().count();
    };
    add("fc1.w", h, in);
    add("fc1.b", h, 1);
    add("gru.wx", 3 * h, h);
    add("gru.wh", 3 * h, h);
    add("gru.b", 3 * h, 1);
    add("fc2.w", h, h);
    add("fc2.b", h, 1);
    add("head.w", a, h);
    add("head.b", a, 1);
}

template <class S>
const S* Net<S>::slice_ptr(int which) const {
    return params_.data() + slices_[static_cast<std::size_t>(which)].offset;
}

template <class S>
S* Net<S>::slice_ptr(int which) {
    return params_.data() + slices_[static_cast<std::size_t>(which)].offset;
}

template <class S>
Net<S> Net<S>::init(Arch arch, Rng& rng) {
    Net net(arch);
    for (const Slice& s : net.slices_) {
        if (s.cols == 1) continue; // biases stay zero
        double bound = 1.0 / std::sqrt(static_cast<double>(s.cols));
        S* p = net.params_.data() + s.offset;
        for (std::size_t i = 0; i < s.count(); ++i) {
            p[i] = static_cast<S>(rng.uniform(-bound, bound));
        }
    }
    return net;
}

template <class S>
Net<S> Net<S>::from_params(Arch arch, std::vector<S> params) {
    Net net(arch);
    if (params.size() != net.params_.size()) {
        throw std::invalid_argument("Net: parameter vector size mismatch");
    }
    net.params_ = std::move(params);
    return net;
}

template <class S>
void Net<S>::forward_step(std::span<const S> obs, std::span<S> hidden, std::span<S> q_out) const {
    int in = arch_.input, h = arch_.hidden, a = arch_.actions;
    if (obs.size() != static_cast<std::size_t>(in) || hidden.size() != static_cast<std::size_t>(h) ||
        q_out.size() != static_cast<std::size_t>(a)) {
        throw std::invalid_argument("Net::forward_step: shape mismatch");
    }
    std::vector<S> a1(static_cast<std::size_t>(h)), gx(static_cast<std::size_t>(3 * h)),
        gh(static_cast<std::size_t>(3 * h)), hn(static_cast<std::size_t>(h)),
        a2(static_cast<std::size_t>(h));
    const S* w1 = slice_ptr(kFc1W);
    const S* b1 = slice_ptr(kFc1B);
    for (int o = 0; o < h; ++o) {
        S acc = b1[o];
        const S* wrow = w1 + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) acc += wrow[i] * obs[static_cast<std::size_t>(i)];
        a1[static_cast<std::size_t>(o)] = acc > S(0) ? acc : S(0);
    }
    const S* wx = slice_ptr(kGruWx);
    const S* wh = slice_ptr(kGruWh);
    const S* gb = slice_ptr(kGruB);
    for (int o = 0; o < 3 * h; ++o) {
        S accx = gb[o], acch = S(0);
        const S* wxrow = wx + static_cast<std::size_t>(o) * h;
        const S* whrow = wh + static_cast<std::size_t>(o) * h;
        for (int i = 0; i < h; ++i) {
            accx += wxrow[i] * a1[static_cast<std::size_t>(i)];
            acch += whrow[i] * hidden[static_cast<std::size_t>(i)];
        }
        gx[static_cast<std::size_t>(o)] = accx;
        gh[static_cast<std::size_t>(o)] = acch;
    }
    for (int i = 0; i < h; ++i) {
        S z = sigmoid(gx[static_cast<std::size_t>(i)] + gh[static_cast<std::size_t>(i)]);
        S r = sigmoid(gx[static_cast<std::size_t>(h + i)] + gh[static_cast<std::size_t>(h + i)]);
        S n = std::tanh(gx[static_cast<std::size_t>(2 * h + i)] +
                        r * gh[static_cast<std::size_t>(2 * h + i)]);
        hn[static_cast<std::size_t>(i)] =
            (S(1) - z) * n + z * hidden[static_cast<std::size_t>(i)];
    }
    const S* w2 = slice_ptr(kFc2W);
    const S* b2 = slice_ptr(kFc2B);
    for (int o = 0; o < h; ++o) {
        S acc = b2[o];
        const S* wrow = w2 + static_cast<std::size_t>(o) * h;
        for (int i = 0; i < h; ++i) acc += wrow[i] * hn[static_cast<std::size_t>(i)];
        a2[static_cast<std::size_t>(o)] = acc > S(0) ? acc : S(0);
    }
    const S* w3 = slice_ptr(kHeadW);
    const S* b3 = slice_ptr(kHeadB);
    for (int o = 0; o < a; ++o) {
        S acc = b3[o];
        const S* wrow = w3 + static_cast<std::size_t>(o) * h;
        for (int i = 0; i < h; ++i) acc += wrow[i] * a2[static_cast<std::size_t>(i)];
        q_out[static_cast<std::size_t>(o)] = acc;
    }
    std::copy(hn.begin(), hn.end(), hidden.begin());
}

template <class S>
typename Net<S>::Cache Net<S>::forward_seq(std::vector<S> obs, int rows, int steps) const {
    int in = arch_.input, h = arch_.hidden, a = arch_.actions;
    if (obs.size() != static_cast<std::size_t>(steps) * rows * in) {
        throw std::invalid_argument("Net::forward_seq: observation buffer size mismatch");
    }
    Cache c;
    c.rows = rows;
    c.steps = steps;
    c.obs = std::move(obs);
    std::size_t rh = static_cast<std::size_t>(rows) * h;
    std::size_t r3h = static_cast<std::size_t>(rows) * 3 * h;
    c.a1.resize(static_cast<std::size_t>(steps) * rh);
    c.gh.resize(static_cast<std::size_t>(steps) * r3h);
    c.z.resize(static_cast<std::size_t>(steps) * rh);
    c.r.resize(static_cast<std::size_t>(steps) * rh);
    c.n.resize(static_cast<std::size_t>(steps) * rh);
    c.h.assign(static_cast<std::size_t>(steps + 1) * rh, S(0));
    c.a2.resize(static_cast<std::size_t>(steps) * rh);
    c.q.resize(static_cast<std::size_t>(steps) * rows * a);

    std::vector<S> w1t = transpose(slice_ptr(kFc1W), h, in);
    std::vector<S> wxt = transpose(slice_ptr(kGruWx), 3 * h, h);
    std::vector<S> wht = transpose(slice_ptr(kGruWh), 3 * h, h);
    std::vector<S> w2t = transpose(slice_ptr(kFc2W), h, h);
    std::vector<S> w3t = transpose(slice_ptr(kHeadW), a, h);
    const S* b1 = slice_ptr(kFc1B);
    const S* gb = slice_ptr(kGruB);
    const S* b2 = slice_ptr(kFc2B);
    const S* b3 = slice_ptr(kHeadB);

    std::vector<S> gx(r3h);
    for (int t = 0; t < steps; ++t) {
        const S* x_t = c.obs.data() + static_cast<std::size_t>(t) * rows * in;
        S* a1_t = c.a1.data() + static_cast<std::size_t>(t) * rh;
        affine_rows(x_t, rows, in, w1t.data(), b1, a1_t, h);
        for (std::size_t i = 0; i < rh; ++i) a1_t[i] = a1_t[i] > S(0) ? a1_t[i] : S(0);

        const S* h_prev = c.h.data() + static_cast<std::size_t>(t) * rh;
        S* gh_t = c.gh.data() + static_cast<std::size_t>(t) * r3h;
        affine_rows(a1_t, rows, h, wxt.data(), gb, gx.data(), 3 * h);
        affine_rows(h_prev, rows, h, wht.data(), static_cast<const S*>(nullptr), gh_t, 3 * h);

        S* z_t = c.z.data() + static_cast<std::size_t>(t) * rh;
        S* r_t = c.r.data() + static_cast<std::size_t>(t) * rh;
        S* n_t = c.n.data() + static_cast<std::size_t>(t) * rh;
        S* h_t = c.h.data() + static_cast<std::size_t>(t + 1) * rh;
        for (int row = 0; row < rows; ++row) {
            const S* gxr = gx.data() + static_cast<std::size_t>(row) * 3 * h;
            const S* ghr = gh_t + static_cast<std::size_t>(row) * 3 * h;
            const S* hp = h_prev + static_cast<std::size_t>(row) * h;
            S* zr = z_t + static_cast<std::size_t>(row) * h;
            S* rr = r_t + static_cast<std::size_t>(row) * h;
            S* nr = n_t + static_cast<std::size_t>(row) * h;
            S* hr = h_t + static_cast<std::size_t>(row) * h;
            for (int i = 0; i < h; ++i) {
                S z = sigmoid(gxr[i] + ghr[i]);
                S r = sigmoid(gxr[h + i] + ghr[h + i]);
                S n = std::tanh(gxr[2 * h + i] + r * ghr[2 * h + i]);
                zr[i] = z;
                rr[i] = r;
                nr[i] = n;
                hr[i] = (S(1) - z) * n + z * hp[i];
            }
        }

        S* a2_t = c.a2.data() + static_cast<std::size_t>(t) * rh;
        affine_rows(h_t, rows, h, w2t.data(), b2, a2_t, h);
        for (std::size_t i = 0; i < rh; ++i) a2_t[i] = a2_t[i] > S(0) ? a2_t[i] : S(0);

        S* q_t = c.q.data() + static_cast<std::size_t>(t) * rows * a;
        affine_rows(a2_t, rows, h, w3t.data(), b3, q_t, a);
    }
    return c;
}

template <class S>
std::vector<S> Net<S>::backward_seq(const Cache& c, std::span<const S> dq) const {
    int in = arch_.input, h = arch_.hidden, a = arch_.actions;
    int rows = c.rows, steps = c.steps;
    if (dq.size() != c.q.size()) {
        throw std::invalid_argument("Net::backward_seq: dq size mismatch");
    }
    std::vector<S> grad(params_.size(), S(0));
    auto gptr = [&](int which) { return grad.data() + slices_[static_cast<std::size_t>(which)].offset; };

    std::size_t rh = static_cast<std::size_t>(rows) * h;
    std::size_t r3h = static_cast<std::size_t>(rows) * 3 * h;
    std::vector<S> dh(rh, S(0));      // gradient flowing into h after step t
    std::vector<S> da2(rh), dpre2(rh), dhp(rh), dgx(r3h), dgh(r3h), da1(rh);

    const S* w2 = slice_ptr(kFc2W);
    const S* w3 = slice_ptr(kHeadW);
    const S* wx = slice_ptr(kGruWx);
    const S* wh = slice_ptr(kGruWh);

    for (int t = steps - 1; t >= 0; --t) {
        const S* dq_t = dq.data() + static_cast<std::size_t>(t) * rows * a;
        const S* a2_t = c.a2.data() + static_cast<std::size_t>(t) * rh;
        const S* h_t = c.h.data() + static_cast<std::size_t>(t + 1) * rh;
        const S* h_prev = c.h.data() + static_cast<std::size_t>(t) * rh;
        const S* z_t = c.z.data() + static_cast<std::size_t>(t) * rh;
        const S* r_t = c.r.data() + static_cast<std::size_t>(t) * rh;
        const S* n_t = c.n.data() + static_cast<std::size_t>(t) * rh;
        const S* gh_t = c.gh.data() + static_cast<std::size_t>(t) * r3h;
        const S* a1_t = c.a1.data() + static_cast<std::size_t>(t) * rh;
        const S* x_t = c.obs.data() + static_cast<std::size_t>(t) * rows * in;

        // head
        std::fill(da2.begin(), da2.end(), S(0));
        backprop_rows(dq_t, rows, a, w3, da2.data(), h);
        weight_grad_rows(dq_t, a2_t, rows, a, h, gptr(kHeadW), gptr(kHeadB));

        // fc2 through relu; adds to the recurrent gradient dh
        for (std::size_t i = 0; i < rh; ++i) dpre2[i] = a2_t[i] > S(0) ? da2[i] : S(0);
        weight_grad_rows(dpre2.data(), h_t, rows, h, h, gptr(kFc2W), gptr(kFc2B));
        backprop_rows(dpre2.data(), rows, h, w2, dh.data(), h);

        // GRU cell
        std::fill(dhp.begin(), dhp.end(), S(0));
        for (int row = 0; row < rows; ++row) {
            const S* zr = z_t + static_cast<std::size_t>(row) * h;
            const S* rr = r_t + static_cast<std::size_t>(row) * h;
            const S* nr = n_t + static_cast<std::size_t>(row) * h;
            const S* hp = h_prev + static_cast<std::size_t>(row) * h;
            const S* ghr = gh_t + static_cast<std::size_t>(row) * 3 * h;
            const S* dhr = dh.data() + static_cast<std::size_t>(row) * h;
            S* dgxr = dgx.data() + static_cast<std::size_t>(row) * 3 * h;
            S* dghr = dgh.data() + static_cast<std::size_t>(row) * 3 * h;
            S* dhpr = dhp.data() + static_cast<std::size_t>(row) * h;
            for (int i = 0; i < h; ++i) {
                S z = zr[i], r = rr[i], n = nr[i];
                S dz = dhr[i] * (hp[i] - n);
                S dn = dhr[i] * (S(1) - z);
                dhpr[i] += dhr[i] * z;
                S dpn = dn * (S(1) - n * n);
                S dr = dpn * ghr[2 * h + i];
                S dpz = dz * z * (S(1) - z);
                S dpr = dr * r * (S(1) - r);
                dgxr[i] = dpz;
                dgxr[h + i] = dpr;
                dgxr[2 * h + i] = dpn;
                dghr[i] = dpz;
                dghr[h + i] = dpr;
                dghr[2 * h + i] = dpn * r;
            }
        }
        weight_grad_rows(dgx.data(), a1_t, rows, 3 * h, h, gptr(kGruWx), gptr(kGruB));
        weight_grad_rows(dgh.data(), h_prev, rows, 3 * h, h, gptr(kGruWh), static_cast<S*>(nullptr));
        std::fill(da1.begin(), da1.end(), S(0));
        backprop_rows(dgx.data(), rows, 3 * h, wx, da1.data(), h);
        backprop_rows(dgh.data(), rows, 3 * h, wh, dhp.data(), h);

        // fc1 through relu
        for (std::size_t i = 0; i < rh; ++i) da1[i] = a1_t[i] > S(0) ? da1[i] : S(0);
        weight_grad_rows(da1.data(), x_t, rows, h, in, gptr(kFc1W), gptr(kFc1B));

        dh = dhp;
    }
    return grad;
}

template <class S>
AdamOptimizer<S>::AdamOptimizer(std::size_t n_params, double learning_rate, double beta1,
                                double beta2, double epsilon)
    : m_(n_params, S(0)), v_(n_params, S(0)), lr_(learning_rate), beta1_(beta1), beta2_(beta2),
      eps_(epsilon) {}

template <class S>
void AdamOptimizer<S>::step(std::vector<S>& params, std::span<const S> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw std::invalid_argument("AdamOptimizer: shape mismatch");
    }
    ++steps_;
    S b1 = static_cast<S>(beta1_), b2 = static_cast<S>(beta2_);
    S corr1 = static_cast<S>(1.0 - std::pow(beta1_, steps_));
    S corr2 = static_cast<S>(1.0 - std::pow(beta2_, steps_));
    S lr = static_cast<S>(lr_), eps = static_cast<S>(eps_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        S g = grad[i];
        m_[i] = b1 * m_[i] + (S(1) - b1) * g;
        v_[i] = b2 * v_[i] + (S(1) - b2) * g * g;
        S mhat = m_[i] / corr1;
        S vhat = v_[i] / corr2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

template class Net<float>;
template class Net<double>;
template class AdamOptimizer<float>;
template class AdamOptimizer<double>;

} // namespace uwjsa::neural
