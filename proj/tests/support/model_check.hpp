// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end finite differences through a tiny DD-RNN: every parameter of
// the model against the loss of each decoder.

#pragma once

#include "sandhi/model.hpp"
#include "support/gradcheck.hpp"

#include <string>
#include <vector>

namespace sandhi::testing {

struct EndToEndCheck {
    double worst = 0.0;
    std::string where;
    std::size_t checked = 0;
};

inline ModelConfig tiny_model_config(Variant variant = Variant::DdRnn) {
    ModelConfig mc;
    mc.embed_dim = 4;
    mc.hidden = 6;
    mc.layers = 2;
    mc.dropout = 0.3f;
    mc.vocab_size = 8;
    mc.variant = variant;
    return mc;
}

// Two examples, the longer of length 5, so padding is exercised too.
inline std::vector<EncodedExample> tiny_examples() {
    std::vector<EncodedExample> ex(2);
    ex[0].input = {5, 6, 7, 5, 6};
    ex[0].locations = {0, 1, 0, 0, 0};
    ex[0].chars = {1, 5, 6, 4, 7, 5, 6, 2};
    ex[1].input = {7, 6, 5};
    ex[1].locations = {0, 1, 0};
    ex[1].chars = {1, 7, 6, 4, 5, 2};
    return ex;
}

inline EndToEndCheck end_to_end_grad_check(Decoder which, std::uint64_t seed) {
    DdRnnModel model(tiny_model_config(), seed);
    const auto examples = tiny_examples();
    std::vector<const EncodedExample*> ptrs{&examples[0], &examples[1]};
    const Batch batch = collate(ptrs);

    std::vector<Tensor> params;
    std::vector<std::string> names;
    for (auto& p : model.params().all()) {
        params.push_back(p.value);
        names.push_back(p.name);
    }
    // Dropout stays on; reseeding per evaluation pins the masks.
    auto fn = [&](Tape& tape, std::vector<Tensor>&) {
        nn::Rng rng = nn::Rng(seed).split(99);
        const EncoderOutputs enc = model.encode(tape, batch, true, &rng);
        return tape.scale(model.decoder_loss(tape, which, enc, batch, true, &rng), 0.1f);
    };
    const GradCheckResult r = grad_check(params, fn);
    EndToEndCheck out;
    out.worst = r.worst;
    out.checked = r.checked;
    out.where = r.where;
    // grad_check names inputs by index; prefix the parameter name.
    if (r.where.rfind("input ", 0) == 0) {
        const std::size_t idx = std::stoul(r.where.substr(6));
        if (idx < names.size()) {
            out.where = names[idx] + " (" + r.where + ")";
        }
    }
    return out;
}

} // namespace sandhi::testing
