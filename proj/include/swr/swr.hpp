#pragma once

#include "swr/audio.hpp"
#include "swr/config.hpp"
#include "swr/errors.hpp"
#include "swr/fragmentation.hpp"
#include "swr/metrics/fad.hpp"
#include "swr/metrics/scad.hpp"
#include "swr/metrics/wer.hpp"
#include "swr/mixture.hpp"
#include "swr/pipeline.hpp"
#include "swr/random.hpp"
#include "swr/scramble.hpp"
#include "swr/separation.hpp"
#include "swr/vad.hpp"
#include "swr/wav.hpp"
