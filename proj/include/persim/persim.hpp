#pragma once
// Umbrella header.

#include "persim/ablation.hpp"
#include "persim/backend.hpp"
#include "persim/battery.hpp"
#include "persim/ccd.hpp"
#include "persim/condition.hpp"
#include "persim/core.hpp"
#include "persim/emotion.hpp"
#include "persim/lexicon.hpp"
#include "persim/memory.hpp"
#include "persim/numerics.hpp"
#include "persim/ocean.hpp"
#include "persim/profile.hpp"
#include "persim/psychometrics.hpp"
#include "persim/record.hpp"
#include "persim/records.hpp"
#include "persim/report.hpp"
#include "persim/scenario.hpp"
#include "persim/stats.hpp"
#include "persim/workflow.hpp"
