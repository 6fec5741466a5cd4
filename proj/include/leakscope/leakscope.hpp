// Umbrella header.
#pragma once

#include "leakscope/analyzer.hpp"
#include "leakscope/checker.hpp"
#include "leakscope/classify.hpp"
#include "leakscope/lint.hpp"
#include "leakscope/parser.hpp"
#include "leakscope/profile.hpp"
#include "leakscope/program.hpp"
#include "leakscope/report.hpp"
#include "leakscope/runtime.hpp"
#include "leakscope/scenarios.hpp"
#include "leakscope/snapshot.hpp"
#include "leakscope/types.hpp"
