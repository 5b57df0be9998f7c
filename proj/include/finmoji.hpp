#pragma once

#include "finmoji/classifier.hpp"
#include "finmoji/corpus.hpp"
#include "finmoji/error.hpp"
#include "finmoji/lexicon.hpp"
#include "finmoji/pipeline.hpp"
#include "finmoji/random.hpp"
#include "finmoji/stats.hpp"
#include "finmoji/synthetic.hpp"
#include "finmoji/tokenizer.hpp"
#include "finmoji/utf8.hpp"
#include "finmoji/vectorizer.hpp"
