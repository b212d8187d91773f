#pragma once

// Umbrella header for the MARE toolkit.

#include "mare/assembler.hpp"
#include "mare/convert.hpp"
#include "mare/corpus_io.hpp"
#include "mare/crf.hpp"
#include "mare/crf_tagger.hpp"
#include "mare/document.hpp"
#include "mare/evalkit.hpp"
#include "mare/features.hpp"
#include "mare/model_io.hpp"
#include "mare/prediction_io.hpp"
#include "mare/rng.hpp"
#include "mare/schema.hpp"
#include "mare/span.hpp"
#include "mare/span_labeler.hpp"
#include "mare/stats.hpp"
#include "mare/synth.hpp"
#include "mare/tagscheme.hpp"
#include "mare/transforms.hpp"
#include "mare/validate.hpp"
