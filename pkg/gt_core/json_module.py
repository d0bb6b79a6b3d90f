"""gt_core/json_module.py

Picks the JSON codec used for configuration files and JSON output: ujson when installed and enabled,
the standard library otherwise

Copyright (C) 2016  Timothy Edmund Crosley

Permission is hereby granted, free of charge, to any person obtaining a copy of this software and associated
documentation files (the "Software"), to deal in the Software without restriction, including without limitation
the rights to use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the Software, and
to permit persons to whom the Software is furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all copies or
substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED
TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF
CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR
OTHER DEALINGS IN THE SOFTWARE.

"""
from __future__ import absolute_import

import os
from types import SimpleNamespace

GT_USE_UJSON = os.environ.get("GT_USE_UJSON", "1").lower() not in ("0", "false", "")

try:  # pragma: no cover
    if not GT_USE_UJSON:
        raise ImportError("ujson disabled through GT_USE_UJSON")
    import ujson as _codec

    class dumps_proxy:  # noqa: N801
        """Proxies the call so non supported kwargs are skipped
        and it enables escape_forward_slashes to simulate built-in json
        """

        _dumps = staticmethod(_codec.dumps)

        def __call__(self, content, **kwargs):
            default = kwargs.pop("default", None)
            separators = kwargs.pop("separators", None)
            try:
                return self._dumps(content, escape_forward_slashes=False, **kwargs)
            except Exception as exception:
                if default is None:
                    raise TypeError("Type[ujson] is not Serializable", exception)
            # ujson has no default hook, the stdlib encoder handles the fallback
            import json as fallback

            return fallback.dumps(content, default=default, separators=separators, **kwargs)

    json = SimpleNamespace(loads=_codec.loads, dumps=dumps_proxy(), backend="ujson")
except ImportError:  # pragma: no cover
    import json as _codec

    json = SimpleNamespace(loads=_codec.loads, dumps=_codec.dumps, backend="json")
