#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "parc/errors.hpp"
#include "parc/pool.hpp"
#include "parc/prompt_template.hpp"
#include "parc/retrieval.hpp"
#include "parc/text.hpp"

namespace parc {

// A low-resource-language input to classify or summarize.
struct QueryExample {
    std::string text;
    std::optional<std::string> gold_label;
    std::optional<std::string> reference_summary;
};

struct AssembledPrompt {
    std::string full_text;
    std::size_t demo_count = 0;
    std::string template_id;
    bool truncated = false;
};

// Values for optional template slots, supplied by task configuration.
struct RenderContext {
    std::optional<std::string> target_lang;
};

// Prompt length budget in Unicode code points; 0 means unlimited. When
// exceeded, demonstration texts are cut from the end, lowest-similarity
// demonstration first. The query is never cut.
struct PromptBudget {
    std::size_t max_chars = 0;
};

namespace detail {

inline void replace_all(std::string& text, std::string_view slot, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

inline std::string render_body(const PromptTemplate& t, std::string_view text,
                               const RenderContext& ctx) {
    std::string out = t.body;
    replace_all(out, "{text}", text);
    if (out.find("{target_lang}") != std::string::npos) {
        if (!ctx.target_lang) {
            throw Error(ErrorCode::MissingSlotValue,
                        "template '" + t.id + "' needs {target_lang} but none was supplied");
        }
        replace_all(out, "{target_lang}", *ctx.target_lang);
    }
    return out;
}

}  // namespace detail

// Template body with the query substituted; no demonstrations. For masked
// templates the mask marker stays in place for the model to fill.
inline AssembledPrompt render_zero_shot(const QueryExample& q, const PromptTemplate& t,
                                        const RenderContext& ctx = {}) {
    AssembledPrompt prompt;
    prompt.full_text = detail::render_body(t, q.text, ctx);
    prompt.demo_count = 0;
    prompt.template_id = t.id;
    return prompt;
}

// One demonstration block: the template rendered on the entry text with its
// answer filled in. Generative style appends the answer surface on the next
// line; masked style substitutes the verbalizer word into the mask slot.
inline std::string render_demonstration(const PoolEntry& entry, const PromptTemplate& t,
                                        const std::optional<Verbalizer>& v = {},
                                        const RenderContext& ctx = {}) {
    if (!entry.label) {
        throw Error(ErrorCode::UnlabeledEntry,
                    "pool entry '" + entry.id + "' has no label to demonstrate");
    }
    std::string rendered = detail::render_body(t, entry.text, ctx);
    if (t.style == TemplateStyle::masked) {
        const Verbalizer* verbalizer = v ? &*v : (t.verbalizer ? &*t.verbalizer : nullptr);
        if (verbalizer == nullptr) {
            throw Error(ErrorCode::VerbalizerMiss,
                        "masked template '" + t.id + "' needs a verbalizer for demonstrations");
        }
        detail::replace_all(rendered, t.mask_marker, verbalizer->apply(*entry.label));
        return rendered;
    }
    std::string answer = *entry.label;
    if (!t.options.empty()) {
        bool found = false;
        for (const LabelOption& option : t.options) {
            if (option.label == *entry.label) {
                answer = option.surfaces.front();
                found = true;
                break;
            }
        }
        if (!found) {
            throw Error(ErrorCode::VerbalizerMiss, "label '" + *entry.label +
                                                       "' not in option list of template '" +
                                                       t.id + "'");
        }
    }
    return rendered + "\n" + answer;
}

// Retrieval-enhanced prompt: demonstration blocks in hit order (descending
// similarity), separated by one blank line, query block last with the
// answer position empty. With no hits this is byte-identical to the
// zero-shot rendering.
inline AssembledPrompt assemble_prompt(const QueryExample& q, const RetrievalResult& r,
                                       const SentencePool& pool, const PromptTemplate& t,
                                       const std::optional<Verbalizer>& v = {},
                                       const RenderContext& ctx = {},
                                       const PromptBudget& budget = {}) {
    std::vector<const PoolEntry*> entries;
    entries.reserve(r.hits.size());
    for (const RetrievalHit& hit : r.hits) {
        const PoolEntry* entry = pool.find(hit.entry_id);
        if (entry == nullptr) {
            throw Error(ErrorCode::DanglingHitId,
                        "retrieval hit '" + hit.entry_id + "' not present in pool");
        }
        if (!entry->label) {
            throw Error(ErrorCode::UnlabeledEntry,
                        "pool entry '" + entry->id + "' is unlabeled; run self-prediction first");
        }
        entries.push_back(entry);
    }

    auto build = [&](const std::vector<std::string>& demo_texts) {
        std::string full;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            PoolEntry trimmed = *entries[i];
            trimmed.text = demo_texts[i];
            full += render_demonstration(trimmed, t, v, ctx);
            full += "\n\n";
        }
        full += detail::render_body(t, q.text, ctx);
        return full;
    };

    std::vector<std::string> demo_texts;
    demo_texts.reserve(entries.size());
    for (const PoolEntry* entry : entries) demo_texts.push_back(entry->text);

    AssembledPrompt prompt;
    prompt.template_id = t.id;
    prompt.demo_count = entries.size();
    prompt.full_text = build(demo_texts);

    if (budget.max_chars > 0) {
        std::size_t length = codepoint_count(prompt.full_text);
        if (length > budget.max_chars) {
            std::size_t overflow = length - budget.max_chars;
            // {text} appears exactly once per block, so cutting N code
            // points from a demonstration text shortens the prompt by N.
            for (std::size_t i = entries.size(); i-- > 0 && overflow > 0;) {
                std::size_t available = codepoint_count(demo_texts[i]);
                std::size_t cut = std::min(available, overflow);
                if (cut == 0) continue;
                demo_texts[i] = utf8_prefix(demo_texts[i], available - cut);
                overflow -= cut;
                prompt.truncated = true;
            }
            prompt.full_text = build(demo_texts);
        }
    }
    return prompt;
}

}  // namespace parc
