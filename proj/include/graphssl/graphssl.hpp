#pragma once

#include "graphssl/bop.hpp"
#include "graphssl/classifiers.hpp"
#include "graphssl/dataset.hpp"
#include "graphssl/eigensolver.hpp"
#include "graphssl/embeddings.hpp"
#include "graphssl/error.hpp"
#include "graphssl/features.hpp"
#include "graphssl/graph.hpp"
#include "graphssl/harness/benchmark.hpp"
#include "graphssl/harness/config.hpp"
#include "graphssl/harness/cv.hpp"
#include "graphssl/harness/feature_selection.hpp"
#include "graphssl/harness/grid_search.hpp"
#include "graphssl/harness/report.hpp"
#include "graphssl/harness/stats.hpp"
#include "graphssl/kernels.hpp"
#include "graphssl/linear_svm.hpp"
#include "graphssl/log.hpp"
#include "graphssl/models.hpp"
#include "graphssl/spatial_stats.hpp"
#include "graphssl/synthetic.hpp"
