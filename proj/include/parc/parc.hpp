#pragma once

// Umbrella header for the cross-lingual retrieval-augmented prompting
// toolkit: vector store, prompt engine, model gateway, evaluation metrics
// and the experiment runner.

#include "parc/backend.hpp"
#include "parc/config.hpp"
#include "parc/dataset.hpp"
#include "parc/embedding.hpp"
#include "parc/embedding_cache.hpp"
#include "parc/errors.hpp"
#include "parc/hash.hpp"
#include "parc/manifest.hpp"
#include "parc/metrics.hpp"
#include "parc/parallel.hpp"
#include "parc/pool.hpp"
#include "parc/pool_cache.hpp"
#include "parc/prediction.hpp"
#include "parc/prompt.hpp"
#include "parc/prompt_template.hpp"
#include "parc/retrieval.hpp"
#include "parc/rouge.hpp"
#include "parc/runner.hpp"
#include "parc/self_predict.hpp"
#include "parc/text.hpp"
