#ifndef KSENT_KSENT_HPP
#define KSENT_KSENT_HPP

#include "ksent/block_distribution.hpp"
#include "ksent/blocks.hpp"
#include "ksent/entropy.hpp"
#include "ksent/errors.hpp"
#include "ksent/harness.hpp"
#include "ksent/lemma_fuzz.hpp"
#include "ksent/markov_hull.hpp"
#include "ksent/measure.hpp"
#include "ksent/pitskel.hpp"
#include "ksent/random_measures.hpp"
#include "ksent/sampling.hpp"
#include "ksent/serialize.hpp"
#include "ksent/suspension.hpp"
#include "ksent/truncation.hpp"
#include "ksent/word.hpp"

#endif
