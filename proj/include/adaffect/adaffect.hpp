#pragma once

#include "adaffect/core/csv.hpp"
#include "adaffect/core/error.hpp"
#include "adaffect/core/features_io.hpp"
#include "adaffect/core/manifest.hpp"
#include "adaffect/core/ratings.hpp"
#include "adaffect/core/rng.hpp"
#include "adaffect/core/types.hpp"
#include "adaffect/core/window.hpp"
#include "adaffect/eeg/epoch.hpp"
#include "adaffect/eeg/filter.hpp"
#include "adaffect/eeg/pca.hpp"
#include "adaffect/eval/cv.hpp"
#include "adaffect/eval/fusion.hpp"
#include "adaffect/eval/metrics.hpp"
#include "adaffect/learn/cnn.hpp"
#include "adaffect/learn/common.hpp"
#include "adaffect/learn/grad_check.hpp"
#include "adaffect/learn/model.hpp"
#include "adaffect/learn/mtl.hpp"
#include "adaffect/learn/shallow.hpp"
#include "adaffect/learn/svm.hpp"
#include "adaffect/media/audio.hpp"
#include "adaffect/media/fft.hpp"
#include "adaffect/media/io.hpp"
#include "adaffect/media/video.hpp"
#include "adaffect/sched/scheduler.hpp"
#include "adaffect/stats/agreement.hpp"
#include "adaffect/stats/tests.hpp"
#include "adaffect/synth/gen.hpp"
#include "adaffect/version.hpp"
