#pragma once

#include "rgame/aspect.hpp"
#include "rgame/checkpoint.hpp"
#include "rgame/data.hpp"
#include "rgame/encoder.hpp"
#include "rgame/errors.hpp"
#include "rgame/eval.hpp"
#include "rgame/gradcheck.hpp"
#include "rgame/objectives.hpp"
#include "rgame/ops.hpp"
#include "rgame/oracle.hpp"
#include "rgame/params.hpp"
#include "rgame/players.hpp"
#include "rgame/rng.hpp"
#include "rgame/synth.hpp"
#include "rgame/tensor.hpp"
#include "rgame/threads.hpp"
#include "rgame/trainer.hpp"
