// SPDX-License-Identifier: Apache-2.0
#pragma once

// Everything except the libcurl client (storygraph/http_curl.hpp), which is
// kept separate so that users who bring their own HttpClient need not link
// libcurl.

#include "storygraph/content_extract.hpp"
#include "storygraph/entity_extract.hpp"
#include "storygraph/error.hpp"
#include "storygraph/feed_ingest.hpp"
#include "storygraph/http.hpp"
#include "storygraph/pipeline.hpp"
#include "storygraph/rank.hpp"
#include "storygraph/simgraph.hpp"
#include "storygraph/snapshot_store.hpp"
#include "storygraph/text.hpp"
#include "storygraph/time.hpp"
#include "storygraph/token_set.hpp"
