#pragma once

#include "confcal/binning.hpp"
#include "confcal/dataio.hpp"
#include "confcal/dataset.hpp"
#include "confcal/errors.hpp"
#include "confcal/evaluate.hpp"
#include "confcal/heatmap.hpp"
#include "confcal/measures.hpp"
#include "confcal/metrics.hpp"
#include "confcal/reference.hpp"
#include "confcal/report.hpp"
#include "confcal/scaling.hpp"
#include "confcal/synth.hpp"
