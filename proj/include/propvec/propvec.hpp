#pragma once

#include "propvec/corpus.hpp"
#include "propvec/eval_morph.hpp"
#include "propvec/eval_semantic.hpp"
#include "propvec/model.hpp"
#include "propvec/morph.hpp"
#include "propvec/property_config.hpp"
#include "propvec/sgns.hpp"
#include "propvec/synth.hpp"
#include "propvec/trainer.hpp"
#include "propvec/util.hpp"
#include "propvec/vectors.hpp"
