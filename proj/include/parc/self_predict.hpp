#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parc/backend.hpp"
#include "parc/errors.hpp"
#include "parc/parallel.hpp"
#include "parc/pool.hpp"
#include "parc/prediction.hpp"
#include "parc/prompt.hpp"
#include "parc/prompt_template.hpp"

namespace parc {

// Labels every non-corpus-labeled entry by running the model zero-shot on
// the entry text. Corpus labels are never touched. Returns a new pool, so a
// failure part-way leaves the caller's pool unchanged.
inline SentencePool self_predict_labels(const SentencePool& pool, const Backend& backend,
                                        const PromptTemplate& t, const LabelOptionSet& options,
                                        const std::optional<std::string>& fallback = {},
                                        const RenderContext& ctx = {}) {
    if (t.style == TemplateStyle::masked && !t.verbalizer) {
        throw Error(ErrorCode::VerbalizerMiss,
                    "masked self-prediction template '" + t.id + "' has no verbalizer");
    }
    std::vector<PoolEntry> entries = pool.entries();
    std::size_t workers =
        static_cast<std::size_t>(std::max(1, backend.descriptor().max_in_flight));
    parallel_for(entries.size(), workers, [&](std::size_t i) {
        PoolEntry& entry = entries[i];
        if (entry.label_source == LabelSource::corpus) return;
        QueryExample query{entry.text, {}, {}};
        std::string prompt = render_zero_shot(query, t, ctx).full_text;
        std::string label;
        if (t.style == TemplateStyle::masked) {
            auto scores = backend.fill_mask(prompt, t.verbalizer->words(), t.mask_marker);
            label = t.verbalizer->invert(best_candidate(scores).word);
        } else {
            Prediction prediction =
                map_generation_to_label(backend.generate(prompt), options, fallback);
            if (!prediction.mapped_label) {
                throw Error(ErrorCode::ConstraintViolation,
                            "self-prediction for entry '" + entry.id +
                                "' was unparsed and no fallback label is configured");
            }
            label = *prediction.mapped_label;
        }
        entry.label = label;
        entry.label_source = LabelSource::self_predicted;
    });
    return SentencePool(std::move(entries), pool.dim());
}

}  // namespace parc
