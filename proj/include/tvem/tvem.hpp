#pragma once

#include "tvem/dataset.hpp"
#include "tvem/diagnostics.hpp"
#include "tvem/engine.hpp"
#include "tvem/error.hpp"
#include "tvem/experiment.hpp"
#include "tvem/io.hpp"
#include "tvem/mixture.hpp"
#include "tvem/responsibilities.hpp"
#include "tvem/rng.hpp"
#include "tvem/truncation.hpp"
