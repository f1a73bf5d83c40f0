#pragma once

#include "fairalloc/platform/cohort.hpp"
#include "fairalloc/platform/config.hpp"
#include "fairalloc/platform/dataset.hpp"
#include "fairalloc/platform/event_store.hpp"
#include "fairalloc/platform/http_server.hpp"
#include "fairalloc/platform/pipeline.hpp"
#include "fairalloc/platform/service.hpp"
