#pragma once

#include "blocknorm/errors.hpp"
#include "blocknorm/featurenorm.hpp"
#include "blocknorm/jigsaw.hpp"
#include "blocknorm/layers.hpp"
#include "blocknorm/manifest.hpp"
#include "blocknorm/metrics.hpp"
#include "blocknorm/model.hpp"
#include "blocknorm/model_io.hpp"
#include "blocknorm/npy.hpp"
#include "blocknorm/pipeline.hpp"
#include "blocknorm/reports.hpp"
#include "blocknorm/rng.hpp"
#include "blocknorm/samples.hpp"
#include "blocknorm/scoring.hpp"
#include "blocknorm/selection.hpp"
#include "blocknorm/tensor.hpp"
