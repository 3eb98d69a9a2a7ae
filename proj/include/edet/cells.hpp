#pragma once

#include <cstdint>
#include <string>

#include "edet/tensor.hpp"

namespace edet {

enum class CellKind : std::uint8_t { FastRNN = 0, FastGRNN = 1, LSTM = 2, GRU = 3 };

const char* to_string(CellKind kind);
CellKind cell_kind_from_string(const std::string& name);

/// Stacked weight blocks in W/U: LSTM gates [i,f,g,o], GRU gates [z,r,h].
/// FastGRNN is 1, not 2: its gate and candidate share one (W, U) pair.
int weight_blocks(CellKind kind);
/// Stacked bias blocks: FastGRNN carries separate b_z and b_h.
int bias_blocks(CellKind kind);
bool has_scalars(CellKind kind);

/// W is (blocks*hidden) x input, U is (blocks*hidden) x hidden, b is
/// bias_blocks*hidden. The two residual scalars are stored unconstrained and
/// squashed through sigmoid inside the step (FastRNN: alpha/beta, FastGRNN:
/// zeta/nu); unused for LSTM/GRU.
struct CellParams {
    CellKind kind = CellKind::FastRNN;
    Mat W;
    Mat U;
    Vec b;
    double s1_raw = 0.0;
    double s2_raw = 0.0;

    int hidden() const { return static_cast<int>(U.cols()); }
    int input() const { return static_cast<int>(W.cols()); }
    void validate() const; // throws ShapeError
};

/// Same tensor shapes as the parameters they correspond to.
struct CellGrads {
    Mat W;
    Mat U;
    Vec b;
    double s1 = 0.0;
    double s2 = 0.0;
};

/// Values saved by the forward step that the backward step consumes. Unused
/// members stay empty for cell kinds that do not need them.
struct CellCache {
    Mat h_prev;
    Mat z, htil;          // FastGRNN and GRU gates; FastRNN stores tanh output in htil
    Mat r, rh;            // GRU reset gate and r (.) h_prev
    Mat i, f, g, o, c_prev, c_tanh; // LSTM
};

/// One recurrent step over a batch: x is B x input, h_prev is B x hidden;
/// returns B x hidden. For LSTM, c is the carry state (B x hidden), updated
/// in place; other kinds ignore it. Pass cache=nullptr for inference.
Mat cell_step(const CellParams& p, const MatRef& x, const Mat& h_prev, Mat* c,
              CellCache* cache);

/// Reverse-mode step: dh is dLoss/dh_t; dc carries dLoss/dc_t in and leaves
/// dLoss/dc_{t-1} (LSTM only). Accumulates parameter gradients into g and
/// returns dh_prev; when dx is non-null it receives dLoss/dx_t.
Mat cell_backward_step(const CellParams& p, const MatRef& x, const CellCache& cc, const Mat& dh,
                       Mat* dc, CellGrads& g, Mat* dx);

/// Single-vector convenience wrappers around the batch step.
Vec fastrnn_step(const Vec& x, const Vec& h_prev, const CellParams& p);
Vec fastgrnn_step(const Vec& x, const Vec& h_prev, const CellParams& p);
Vec baseline_cell_step(const Vec& x, Vec& h_prev, Vec& c, const CellParams& p);

std::size_t cell_param_count(const CellParams& p);

/// W, U ~ uniform(-1/sqrt(hidden), +1/sqrt(hidden)); biases zero; raw scalars
/// at documented constants (alpha ~ 0.2, beta ~ 0.9, zeta ~ 0.98, nu ~ 0.05).
CellParams init_cell(CellKind kind, int input, int hidden, Rng& rng);

CellGrads make_cell_grads(const CellParams& p);
void zero(CellGrads& g);

} // namespace edet
