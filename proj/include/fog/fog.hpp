#pragma once

#include "fog/config.hpp"
#include "fog/error.hpp"
#include "fog/host/report.hpp"
#include "fog/host/session.hpp"
#include "fog/host/transport.hpp"
#include "fog/ingest.hpp"
#include "fog/micro/device.hpp"
#include "fog/nn/model.hpp"
#include "fog/nn/model_io.hpp"
#include "fog/nn/train.hpp"
#include "fog/quant/packed_model.hpp"
#include "fog/synth.hpp"
#include "fog/tune.hpp"
#include "fog/windows.hpp"
