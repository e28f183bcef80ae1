#pragma once

#include <string>

namespace lstmrf {

/// Which LSTM-derived representation feeds the forest.
///   Pred:   one column, the scalar normalized LSTM prediction
///   Hidden: the final hidden state (d_h columns)
///   Splice: the window values followed by the final hidden state (L + d_h)
enum class FusionKind { Pred, Hidden, Splice };

struct FusionMode {
    FusionKind kind = FusionKind::Pred;
    bool include_exogenous = false; // append environment columns after the mode's columns
};

const char* to_string(FusionKind kind);
FusionKind fusion_kind_from_string(const std::string& name);

} // namespace lstmrf
