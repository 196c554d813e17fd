#pragma once

// Umbrella header for the cervdx library.

#include "cervdx/core.hpp"
#include "cervdx/components.hpp"
#include "cervdx/rotated_rect.hpp"
#include "cervdx/labeling.hpp"
#include "cervdx/herniation.hpp"
#include "cervdx/heatmap.hpp"
#include "cervdx/geometry.hpp"
#include "cervdx/signal.hpp"
#include "cervdx/kang.hpp"
#include "cervdx/objectives.hpp"
#include "cervdx/evaluation.hpp"
#include "cervdx/io.hpp"
#include "cervdx/report.hpp"
#include "cervdx/phantom.hpp"
#include "cervdx/pipeline.hpp"
#include "cervdx/batch.hpp"
