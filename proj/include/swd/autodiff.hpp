#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "swd/common.hpp"

namespace swd::ad {

/// Tensor extent as (batch, channels, length). Convolution weights reuse the
/// triple as (out_channels, in_channels, kernel).
struct Shape {
    int b = 1;
    int c = 1;
    int l = 1;

    Eigen::Index size() const {
        return static_cast<Eigen::Index>(b) * static_cast<Eigen::Index>(c) * static_cast<Eigen::Index>(l);
    }
    bool operator==(const Shape&) const = default;
};

enum class Mode { train, eval };

template <typename Scalar>
using ArrayX = Eigen::ArrayX<Scalar>;

/// Computation record for one forward pass. Nodes are appended in execution
/// order, so reverse creation order is a reverse topological order; backward
/// visits each node exactly once and accumulates gradients additively.
template <typename Scalar>
class Tape {
public:
    using Array = ArrayX<Scalar>;
    using BackwardFn = std::function<void(Tape&, int self)>;

    struct Node {
        Shape shape;
        Array value;
        Array grad;  // empty until touched
        BackwardFn backward;
    };

    int add_node(Shape shape, Array value, BackwardFn backward = nullptr) {
        if (value.size() != shape.size()) fail("ShapeMismatch", "node value size does not match shape");
        nodes_.push_back(Node{shape, std::move(value), Array(), std::move(backward)});
        return static_cast<int>(nodes_.size()) - 1;
    }

    Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

    const Array& value(int id) const { return node(id).value; }

    /// Gradient array, allocated to zeros on first use.
    Array& grad(int id) {
        Node& n = node(id);
        if (n.grad.size() == 0) n.grad = Array::Zero(n.shape.size());
        return n.grad;
    }

    bool has_grad(int id) const { return node(id).grad.size() != 0; }

    void backward(int root) {
        if (node(root).shape.size() != 1)
            fail("ShapeMismatch", "backward expects a scalar root node");
        grad(root)[0] = Scalar(1);
        for (int id = root; id >= 0; --id) {
            Node& n = node(id);
            if (n.grad.size() == 0 || !n.backward) continue;
            n.backward(*this, id);
        }
    }

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    std::vector<Node> nodes_;
};

/// Lightweight handle onto a tape node; free functions below build the graph.
template <typename Scalar>
struct Var {
    Tape<Scalar>* tape = nullptr;
    int id = -1;

    Shape shape() const { return tape->node(id).shape; }
    const ArrayX<Scalar>& value() const { return tape->value(id); }
    const ArrayX<Scalar>& grad() const { return tape->grad(id); }
};

template <typename Scalar>
Var<Scalar> leaf(Tape<Scalar>& tape, Shape shape, ArrayX<Scalar> value) {
    return Var<Scalar>{&tape, tape.add_node(shape, std::move(value))};
}

template <typename Scalar, typename Derived>
Var<Scalar> leaf(Tape<Scalar>& tape, Shape shape, const Eigen::DenseBase<Derived>& value) {
    static_assert(std::is_same_v<typename Derived::Scalar, Scalar>,
                  "leaf value scalar type must match the tape");
    return leaf(tape, shape, ArrayX<Scalar>(value.derived()));
}

namespace detail {

template <typename Scalar>
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowMap = Eigen::Map<RowMat<Scalar>>;
template <typename Scalar>
using ConstRowMap = Eigen::Map<const RowMat<Scalar>>;

/// Expands one (C, L) item into the (C*K, L) patch matrix for a stride-1
/// "same" cross-correlation with zero padding.
template <typename Scalar>
void im2col(const Scalar* x, int channels, int length, int kernel, RowMat<Scalar>& col) {
    const int pad = (kernel - 1) / 2;
    col.setZero(channels * kernel, length);
    for (int c = 0; c < channels; ++c) {
        for (int k = 0; k < kernel; ++k) {
            const int offset = k - pad;  // source index = dest index + offset
            const int dst_lo = std::max(0, -offset);
            const int dst_hi = std::min(length, length - offset);
            if (dst_hi <= dst_lo) continue;
            const int len = dst_hi - dst_lo;
            col.row(c * kernel + k).segment(dst_lo, len) =
                Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(
                    x + static_cast<std::ptrdiff_t>(c) * length + dst_lo + offset, len);
        }
    }
}

}  // namespace detail

/// Stride-1 "same" cross-correlation: x (B, Cin, L) with w (Cout, Cin, K) and
/// bias (Cout). K must be odd.
template <typename Scalar>
Var<Scalar> conv1d(Var<Scalar> x, Var<Scalar> w, Var<Scalar> bias) {
    Tape<Scalar>& tape = *x.tape;
    const Shape xs = x.shape(), ws = w.shape(), bs = bias.shape();
    const int batch = xs.b, cin = xs.c, length = xs.l;
    const int cout = ws.b, kernel = ws.l;
    if (ws.c != cin) fail("ShapeMismatch", "conv1d: weight input channels do not match input");
    if (bs.b != cout || bs.c != 1 || bs.l != 1) fail("ShapeMismatch", "conv1d: bias shape must be (Cout,1,1)");
    if (kernel % 2 == 0) fail("ShapeMismatch", "conv1d: kernel size must be odd");

    const Shape out_shape{batch, cout, length};
    ArrayX<Scalar> out(out_shape.size());

    detail::RowMat<Scalar> col;
    detail::ConstRowMap<Scalar> wmat(w.value().data(), cout, cin * kernel);
    Eigen::Map<const Eigen::Vector<Scalar, Eigen::Dynamic>> bvec(bias.value().data(), cout);
    for (int b = 0; b < batch; ++b) {
        detail::im2col(x.value().data() + static_cast<std::ptrdiff_t>(b) * cin * length, cin, length, kernel, col);
        detail::RowMap<Scalar> y(out.data() + static_cast<std::ptrdiff_t>(b) * cout * length, cout, length);
        y.noalias() = wmat * col;
        y.colwise() += bvec;
    }

    const int xid = x.id, wid = w.id, bid = bias.id;
    auto backward = [=](Tape<Scalar>& t, int self) {
        const ArrayX<Scalar>& grad_out = t.grad(self);
        const ArrayX<Scalar>& xval = t.value(xid);
        detail::ConstRowMap<Scalar> wm(t.value(wid).data(), cout, cin * kernel);
        detail::RowMap<Scalar> dw(t.grad(wid).data(), cout, cin * kernel);
        Eigen::Map<Eigen::Vector<Scalar, Eigen::Dynamic>> db(t.grad(bid).data(), cout);
        ArrayX<Scalar>& dx = t.grad(xid);
        detail::RowMat<Scalar> colb, dcol;
        const int pad = (kernel - 1) / 2;
        for (int b = 0; b < batch; ++b) {
            detail::ConstRowMap<Scalar> dy(grad_out.data() + static_cast<std::ptrdiff_t>(b) * cout * length,
                                           cout, length);
            detail::im2col(xval.data() + static_cast<std::ptrdiff_t>(b) * cin * length, cin, length, kernel, colb);
            dw.noalias() += dy * colb.transpose();
            db.noalias() += dy.rowwise().sum();
            dcol.noalias() = wm.transpose() * dy;
            // col2im scatter-add
            for (int c = 0; c < cin; ++c) {
                for (int k = 0; k < kernel; ++k) {
                    const int offset = k - pad;
                    const int dst_lo = std::max(0, -offset);
                    const int dst_hi = std::min(length, length - offset);
                    if (dst_hi <= dst_lo) continue;
                    const int len = dst_hi - dst_lo;
                    Eigen::Map<Eigen::Array<Scalar, 1, Eigen::Dynamic>>(
                        dx.data() + (static_cast<std::ptrdiff_t>(b) * cin + c) * length + dst_lo + offset, len) +=
                        dcol.row(c * kernel + k).segment(dst_lo, len).array();
                }
            }
        }
    };
    return Var<Scalar>{&tape, tape.add_node(out_shape, std::move(out), backward)};
}

/// Pairwise max pooling; ties route the gradient to the earlier index.
template <typename Scalar>
Var<Scalar> maxpool1d_2(Var<Scalar> x) {
    Tape<Scalar>& tape = *x.tape;
    const Shape xs = x.shape();
    if (xs.l % 2 != 0) fail("ShapeMismatch", "maxpool1d_2: length must be even");
    const Shape out_shape{xs.b, xs.c, xs.l / 2};
    ArrayX<Scalar> out(out_shape.size());
    std::vector<uint8_t> pick(static_cast<std::size_t>(out_shape.size()));
    const ArrayX<Scalar>& v = x.value();
    for (Eigen::Index i = 0; i < out_shape.size(); ++i) {
        const Scalar a = v[2 * i], b = v[2 * i + 1];
        const bool second = b > a;
        pick[static_cast<std::size_t>(i)] = second ? 1 : 0;
        out[i] = second ? b : a;
    }
    const int xid = x.id;
    auto backward = [xid, pick = std::move(pick)](Tape<Scalar>& t, int self) {
        const ArrayX<Scalar>& dy = t.grad(self);
        ArrayX<Scalar>& dx = t.grad(xid);
        for (Eigen::Index i = 0; i < dy.size(); ++i)
            dx[2 * i + pick[static_cast<std::size_t>(i)]] += dy[i];
    };
    return Var<Scalar>{&tape, tape.add_node(out_shape, std::move(out), backward)};
}

/// Nearest-neighbour upsampling by 2: each sample is repeated twice.
template <typename Scalar>
Var<Scalar> nearest_upsample_2(Var<Scalar> x) {
    Tape<Scalar>& tape = *x.tape;
    const Shape xs = x.shape();
    const Shape out_shape{xs.b, xs.c, xs.l * 2};
    ArrayX<Scalar> out(out_shape.size());
    const ArrayX<Scalar>& v = x.value();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[2 * i] = v[i];
        out[2 * i + 1] = v[i];
    }
    const int xid = x.id;
    auto backward = [xid](Tape<Scalar>& t, int self) {
        const ArrayX<Scalar>& dy = t.grad(self);
        ArrayX<Scalar>& dx = t.grad(xid);
        for (Eigen::Index i = 0; i < dx.size(); ++i) dx[i] += dy[2 * i] + dy[2 * i + 1];
    };
    return Var<Scalar>{&tape, tape.add_node(out_shape, std::move(out), backward)};
}

template <typename Scalar>
Var<Scalar> concat_channels(Var<Scalar> a, Var<Scalar> b) {
    Tape<Scalar>& tape = *a.tape;
    const Shape as = a.shape(), bs = b.shape();
    if (as.b != bs.b || as.l != bs.l) fail("ShapeMismatch", "concat_channels: batch/length mismatch");
    const Shape out_shape{as.b, as.c + bs.c, as.l};
    ArrayX<Scalar> out(out_shape.size());
    const Eigen::Index item_a = static_cast<Eigen::Index>(as.c) * as.l;
    const Eigen::Index item_b = static_cast<Eigen::Index>(bs.c) * bs.l;
    for (int i = 0; i < as.b; ++i) {
        out.segment(i * (item_a + item_b), item_a) = a.value().segment(i * item_a, item_a);
        out.segment(i * (item_a + item_b) + item_a, item_b) = b.value().segment(i * item_b, item_b);
    }
    const int aid = a.id, bid = b.id;
    auto backward = [=](Tape<Scalar>& t, int self) {
        const ArrayX<Scalar>& dy = t.grad(self);
        ArrayX<Scalar>& da = t.grad(aid);
        ArrayX<Scalar>& db = t.grad(bid);
        for (int i = 0; i < as.b; ++i) {
            da.segment(i * item_a, item_a) += dy.segment(i * (item_a + item_b), item_a);
            db.segment(i * item_b, item_b) += dy.segment(i * (item_a + item_b) + item_a, item_b);
        }
    };
    return Var<Scalar>{&tape, tape.add_node(out_shape, std::move(out), backward)};
}

template <typename Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
    Tape<Scalar>& tape = *a.tape;
    if (!(a.shape() == b.shape())) fail("ShapeMismatch", "add: shapes differ");
    ArrayX<Scalar> out = a.value() + b.value();
    const int aid = a.id, bid = b.id;
    auto backward = [=](Tape<Scalar>& t, int self) {
        const ArrayX<Scalar>& dy = t.grad(self);
        t.grad(aid) += dy;
        t.grad(bid) += dy;
    };
    return Var<Scalar>{&tape, tape.add_node(a.shape(), std::move(out), backward)};
}

template <typename Scalar>
Var<Scalar> relu(Var<Scalar> x) {
    Tape<Scalar>& tape = *x.tape;
    ArrayX<Scalar> out = x.value().max(Scalar(0));
    const int xid = x.id;
    auto backward = [xid](Tape<Scalar>& t, int self) {
        const ArrayX<Scalar>& dy = t.grad(self);
        t.grad(xid) += (t.value(xid) > Scalar(0)).template cast<Scalar>() * dy;
    };
    return Var<Scalar>{&tape, tape.add_node(x.shape(), std::move(out), backward)};
}

template <typename Scalar>
Var<Scalar> sigmoid(Var<Scalar> x) {
    Tape<Scalar>& tape = *x.tape;
    ArrayX<Scalar> out = (Scalar(1) / (Scalar(1) + (-x.value()).exp()));
    const int xid = x.id;
    auto backward = [xid](Tape<Scalar>& t, int self) {
        const ArrayX<Scalar>& dy = t.grad(self);
        const ArrayX<Scalar>& y = t.value(self);
        t.grad(xid) += y * (Scalar(1) - y) * dy;
    };
    return Var<Scalar>{&tape, tape.add_node(x.shape(), std::move(out), backward)};
}

/// Per-channel running statistics owned by the model and updated by
/// batchnorm's train mode (momentum update; unbiased variance).
template <typename Scalar>
struct RunningStats {
    ArrayX<Scalar>* mean = nullptr;
    ArrayX<Scalar>* var = nullptr;
};

template <typename Scalar>
Var<Scalar> batchnorm1d(Var<Scalar> x, Var<Scalar> gamma, Var<Scalar> beta,
                        RunningStats<Scalar> running, Mode mode,
                        Scalar eps = Scalar(1e-5), Scalar momentum = Scalar(0.1)) {
    Tape<Scalar>& tape = *x.tape;
    const Shape xs = x.shape();
    const int batch = xs.b, channels = xs.c, length = xs.l;
    if (gamma.shape().size() != channels || beta.shape().size() != channels)
        fail("ShapeMismatch", "batchnorm1d: gamma/beta must have one entry per channel");
    if (!running.mean || !running.var || running.mean->size() != channels || running.var->size() != channels)
        fail("ShapeMismatch", "batchnorm1d: running stats must have one entry per channel");

    const Eigen::Index n_per_channel = static_cast<Eigen::Index>(batch) * length;
    const ArrayX<Scalar>& v = x.value();
    ArrayX<Scalar> out(xs.size());
    ArrayX<Scalar> xhat(xs.size());
    ArrayX<Scalar> inv_std(channels);

    auto channel_seg = [&](const ArrayX<Scalar>& a, int b, int c) {
        return a.segment((static_cast<Eigen::Index>(b) * channels + c) * length, length);
    };

    if (mode == Mode::train) {
        if (n_per_channel < 2) fail("ShapeMismatch", "batchnorm1d: training needs more than one value per channel");
        for (int c = 0; c < channels; ++c) {
            double sum = 0.0, sq = 0.0;
            for (int b = 0; b < batch; ++b) {
                auto seg = channel_seg(v, b, c);
                sum += static_cast<double>(seg.template cast<double>().sum());
                sq += static_cast<double>(seg.template cast<double>().square().sum());
            }
            const double mean = sum / static_cast<double>(n_per_channel);
            const double var = sq / static_cast<double>(n_per_channel) - mean * mean;
            const double istd = 1.0 / std::sqrt(var + static_cast<double>(eps));
            inv_std[c] = static_cast<Scalar>(istd);
            for (int b = 0; b < batch; ++b) {
                const Eigen::Index off = (static_cast<Eigen::Index>(b) * channels + c) * length;
                xhat.segment(off, length) =
                    ((v.segment(off, length) - static_cast<Scalar>(mean)) * static_cast<Scalar>(istd));
                out.segment(off, length) = gamma.value()[c] * xhat.segment(off, length) + beta.value()[c];
            }
            const double unbiased =
                var * static_cast<double>(n_per_channel) / static_cast<double>(n_per_channel - 1);
            (*running.mean)[c] = (Scalar(1) - momentum) * (*running.mean)[c] + momentum * static_cast<Scalar>(mean);
            (*running.var)[c] = (Scalar(1) - momentum) * (*running.var)[c] + momentum * static_cast<Scalar>(unbiased);
        }
    } else {
        for (int c = 0; c < channels; ++c) {
            const Scalar istd = Scalar(1) / std::sqrt((*running.var)[c] + eps);
            inv_std[c] = istd;
            for (int b = 0; b < batch; ++b) {
                const Eigen::Index off = (static_cast<Eigen::Index>(b) * channels + c) * length;
                xhat.segment(off, length) = (v.segment(off, length) - (*running.mean)[c]) * istd;
                out.segment(off, length) = gamma.value()[c] * xhat.segment(off, length) + beta.value()[c];
            }
        }
    }

    const int xid = x.id, gid = gamma.id, bid = beta.id;
    auto backward = [xid, gid, bid, batch, channels, length, n_per_channel, mode,
                     xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape<Scalar>& t, int self) {
        const ArrayX<Scalar>& dy = t.grad(self);
        ArrayX<Scalar>& dx = t.grad(xid);
        ArrayX<Scalar>& dgamma = t.grad(gid);
        ArrayX<Scalar>& dbeta = t.grad(bid);
        const ArrayX<Scalar>& gamma_v = t.value(gid);
        for (int c = 0; c < channels; ++c) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (int b = 0; b < batch; ++b) {
                const Eigen::Index off = (static_cast<Eigen::Index>(b) * channels + c) * length;
                sum_dy += static_cast<double>(dy.segment(off, length).template cast<double>().sum());
                sum_dy_xhat += static_cast<double>(
                    (dy.segment(off, length) * xhat.segment(off, length)).template cast<double>().sum());
            }
            dbeta[c] += static_cast<Scalar>(sum_dy);
            dgamma[c] += static_cast<Scalar>(sum_dy_xhat);
            if (mode == Mode::train) {
                const Scalar mean_dy = static_cast<Scalar>(sum_dy / static_cast<double>(n_per_channel));
                const Scalar mean_dy_xhat = static_cast<Scalar>(sum_dy_xhat / static_cast<double>(n_per_channel));
                for (int b = 0; b < batch; ++b) {
                    const Eigen::Index off = (static_cast<Eigen::Index>(b) * channels + c) * length;
                    dx.segment(off, length) +=
                        gamma_v[c] * inv_std[c] *
                        (dy.segment(off, length) - mean_dy - xhat.segment(off, length) * mean_dy_xhat);
                }
            } else {
                for (int b = 0; b < batch; ++b) {
                    const Eigen::Index off = (static_cast<Eigen::Index>(b) * channels + c) * length;
                    dx.segment(off, length) += gamma_v[c] * inv_std[c] * dy.segment(off, length);
                }
            }
        }
    };
    return Var<Scalar>{&tape, tape.add_node(xs, std::move(out), backward)};
}

/// Smoothed Dice loss over the whole batch:
/// 1 - (2*sum(p*g) + smooth) / (sum(p) + sum(g) + smooth).
template <typename Scalar>
Var<Scalar> dice_loss(Var<Scalar> probs, const ArrayX<Scalar>& targets, Scalar smooth = Scalar(1)) {
    Tape<Scalar>& tape = *probs.tape;
    if (targets.size() != probs.value().size()) fail("ShapeMismatch", "dice_loss: shapes differ");
    const ArrayX<Scalar>& p = probs.value();
    const double sum_pg = (p.template cast<double>() * targets.template cast<double>()).sum();
    const double sum_p = p.template cast<double>().sum();
    const double sum_g = targets.template cast<double>().sum();
    const double numer = 2.0 * sum_pg + static_cast<double>(smooth);
    const double denom = sum_p + sum_g + static_cast<double>(smooth);
    ArrayX<Scalar> out(1);
    out[0] = static_cast<Scalar>(1.0 - numer / denom);

    const int pid = probs.id;
    auto backward = [pid, targets, numer, denom](Tape<Scalar>& t, int self) {
        const Scalar dl = t.grad(self)[0];
        ArrayX<Scalar>& dp = t.grad(pid);
        const double inv_d2 = 1.0 / (denom * denom);
        for (Eigen::Index i = 0; i < dp.size(); ++i) {
            const double g = static_cast<double>(targets[i]);
            dp[i] += dl * static_cast<Scalar>((numer - 2.0 * g * denom) * inv_d2);
        }
    };
    return Var<Scalar>{&tape, tape.add_node(Shape{1, 1, 1}, std::move(out), backward)};
}

/// Fixed-weight scalar reduction; the reduction tree is a single ordered sum.
template <typename Scalar>
Var<Scalar> weighted_sum(Var<Scalar> x, const ArrayX<Scalar>& weights) {
    Tape<Scalar>& tape = *x.tape;
    if (weights.size() != x.value().size()) fail("ShapeMismatch", "weighted_sum: shapes differ");
    ArrayX<Scalar> out(1);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        acc += static_cast<double>(x.value()[i]) * static_cast<double>(weights[i]);
    out[0] = static_cast<Scalar>(acc);
    const int xid = x.id;
    auto backward = [xid, weights](Tape<Scalar>& t, int self) {
        t.grad(xid) += weights * t.grad(self)[0];
    };
    return Var<Scalar>{&tape, tape.add_node(Shape{1, 1, 1}, std::move(out), backward)};
}

}  // namespace swd::ad
