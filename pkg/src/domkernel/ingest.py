"""Parse HTML bytes into ordered labeled DOM trees.

Real crawled pages are routinely malformed, so parsing follows the
HTML5-style recovery discipline: every input yields a tree rooted at
``html`` with ``head`` and ``body`` synthesized when absent, void
elements never take children, stray end tags are dropped, and the
common optional-tag rules (``p``, ``li``, ``dd/dt``, table rows and
cells, ``option``) close their predecessors.  Element nodes only: text,
comments, doctypes, processing instructions, and attributes are
discarded, and tag names are lowercased.

The builder is a deliberately compact subset of full HTML5 tree
construction.  Not implemented (documented divergences on pathological
markup): the adoption-agency reconstruction of misnested formatting
elements, foster parenting of table-misplaced content, ``template``
content trees, and ``frameset`` document replacement.  On such inputs
the result is still deterministic and structurally reasonable.
"""

from __future__ import annotations

import codecs
import re
from html.parser import HTMLParser

from .dom import DomNode, DomTree
from .errors import DepthLimitExceeded, EmptyDocument

__all__ = [
    "parse_html",
    "parse_file",
    "decode_document",
    "DEFAULT_DEPTH_LIMIT",
    "DepthLimitExceeded",
    "EmptyDocument",
]

DEFAULT_DEPTH_LIMIT = 512

VOID_ELEMENTS = frozenset(
    """area base basefont bgsound br col embed frame hr img input keygen
    link meta param source track wbr""".split()
)

# Elements routed into <head> while the head is open (or implicitly
# reopened between </head> and <body>).
_HEAD_ELEMENTS = frozenset(
    "base basefont bgsound link meta noframes script style template title".split()
)

# Raw-text content models: no element children can occur inside these.
_CDATA_ELEMENTS = ("script", "style", "textarea", "title", "xmp", "iframe", "noembed", "noframes")

# Elements whose start tag closes an open <p>.
_P_CLOSERS = frozenset(
    """address article aside blockquote center details dialog dir div dl
    fieldset figcaption figure footer form h1 h2 h3 h4 h5 h6 header hgroup
    hr li listing main menu nav ol p plaintext pre section summary table
    ul xmp dd dt""".split()
)

_HEADINGS = frozenset({"h1", "h2", "h3", "h4", "h5", "h6"})

# Default scope boundaries: implied-close searches never cross these.
_SCOPE = frozenset(
    "applet caption html body table td th marquee object template".split()
)
_BUTTON_SCOPE = _SCOPE | {"button"}
_TABLE_SCOPE = frozenset({"html", "body", "table"})

# Table-structure start tags are ignored outside any open table.
_TABLE_PARTS = frozenset(
    "caption col colgroup frame tbody td tfoot th thead tr".split()
)

# The HTML5 "special" category: a stray end tag never closes across one
# of these, and self-closing syntax is ignored for known HTML elements.
_SPECIAL = frozenset(
    """address applet area article aside base basefont bgsound blockquote
    body br button caption center col colgroup dd details dir div dl dt
    embed fieldset figcaption figure footer form frame frameset h1 h2 h3
    h4 h5 h6 head header hgroup hr html iframe img input keygen li link
    listing main marquee menu meta nav noembed noframes noscript object ol
    p param plaintext pre script section select source style summary table
    tbody td template textarea tfoot th thead title tr track ul wbr
    xmp""".split()
)

_KNOWN_HTML = _SPECIAL | frozenset(
    """a abbr acronym b bdi bdo big cite code data datalist del dfn dialog
    em font i ins kbd label legend mark meter noscript optgroup option
    output progress q rb rp rt rtc ruby s samp small span strike strong
    sub sup time tt u var video audio canvas map picture figure main
    details summary slot""".split()
)

# The li / dd / dt implied-close search stops at any special element other
# than these three container-transparent ones.
_LI_BOUNDARY = _SPECIAL - {"address", "div", "p", "li"}
_DD_BOUNDARY = _SPECIAL - {"address", "div", "p", "dd", "dt"}

_BEFORE_HTML, _BEFORE_HEAD, _IN_HEAD, _AFTER_HEAD, _IN_BODY = range(5)


class _RawNode:
    __slots__ = ("label", "children")

    def __init__(self, label: str):
        self.label = label
        self.children: list[_RawNode] = []


class _TreeBuilder(HTMLParser):
    CDATA_CONTENT_ELEMENTS = _CDATA_ELEMENTS

    def __init__(self, depth_limit: int):
        super().__init__(convert_charrefs=True)
        self.depth_limit = depth_limit
        self.mode = _BEFORE_HTML
        self.html: _RawNode | None = None
        self.head: _RawNode | None = None
        self.body: _RawNode | None = None
        self.stack: list[_RawNode] = []
        self._form_open = False

    # -- stack helpers ----------------------------------------------------

    def _insert(self, tag: str, push: bool) -> _RawNode:
        node = _RawNode(tag)
        self.stack[-1].children.append(node)
        if push:
            self.stack.append(node)
            if len(self.stack) > self.depth_limit:
                raise DepthLimitExceeded(len(self.stack), self.depth_limit)
        return node

    def _pop_through(self, node: _RawNode) -> None:
        while self.stack:
            popped = self.stack.pop()
            if popped is node:
                return

    def _close_nearest(self, targets: frozenset[str] | set[str], boundaries: frozenset[str]) -> bool:
        """Pop up to and including the nearest open element in ``targets``,
        unless a scope boundary is hit first."""
        for node in reversed(self.stack):
            if node.label in targets:
                self._pop_through(node)
                return True
            if node.label in boundaries:
                return False
        return False

    # -- document frame synthesis -----------------------------------------

    def _ensure_html(self) -> None:
        if self.html is None:
            self.html = _RawNode("html")
            self.stack = [self.html]
            self.mode = _BEFORE_HEAD

    def _ensure_head(self) -> None:
        self._ensure_html()
        if self.head is None:
            self.head = _RawNode("head")
            self.html.children.append(self.head)

    def _open_body(self) -> None:
        self._ensure_head()
        if self.body is None:
            self.body = _RawNode("body")
            self.html.children.append(self.body)
        self.stack = [self.html, self.body]
        self.mode = _IN_BODY

    # -- tokenizer callbacks ----------------------------------------------

    def handle_starttag(self, tag: str, attrs) -> None:
        self._start(tag)

    def handle_startendtag(self, tag: str, attrs) -> None:
        # HTML5 ignores the self-closing slash on known HTML elements; it
        # is honored for foreign/unknown elements (svg, custom markup).
        if tag in _KNOWN_HTML:
            self._start(tag)
        else:
            self._start(tag, self_closing=True)

    def handle_endtag(self, tag: str) -> None:
        self._end(tag)

    # Text, comments, doctype, and processing instructions carry no
    # element structure; they are dropped.

    def _start(self, tag: str, self_closing: bool = False) -> None:
        if self.mode == _BEFORE_HTML:
            self._ensure_html()
            if tag == "html":
                return
            # fall through: reprocess in BEFORE_HEAD

        if self.mode == _BEFORE_HEAD:
            if tag == "html":
                return
            if tag == "head":
                self._ensure_head()
                self.stack.append(self.head)
                self.mode = _IN_HEAD
                return
            self._ensure_head()
            self.mode = _AFTER_HEAD
            # fall through: reprocess in AFTER_HEAD

        if self.mode == _IN_HEAD:
            if tag in ("html", "head"):
                return
            if tag in _HEAD_ELEMENTS:
                push = tag not in VOID_ELEMENTS and not self_closing
                self._insert(tag, push)
                return
            self._pop_through(self.head)
            self.mode = _AFTER_HEAD
            # fall through: reprocess in AFTER_HEAD

        if self.mode == _AFTER_HEAD:
            if tag == "html":
                return
            if tag == "body":
                self._open_body()
                return
            if tag in _HEAD_ELEMENTS:
                node = _RawNode(tag)
                self.head.children.append(node)
                if tag not in VOID_ELEMENTS and not self_closing:
                    self.stack.append(node)
                return
            self._open_body()
            # fall through: reprocess in IN_BODY

        self._start_in_body(tag, self_closing)

    def _start_in_body(self, tag: str, self_closing: bool) -> None:
        if tag in ("html", "head", "body"):
            return
        if tag in _TABLE_PARTS and not any(n.label == "table" for n in self.stack):
            return  # stray table structure outside a table is dropped
        if tag == "form":
            if self._form_open:
                return
            self._form_open = True

        # Optional-tag rules: close the sibling/ancestor the new element
        # implicitly terminates.
        if tag in _P_CLOSERS:
            self._close_nearest({"p"}, _BUTTON_SCOPE)
        if tag == "li":
            self._close_nearest({"li"}, _LI_BOUNDARY)
        elif tag in ("dd", "dt"):
            self._close_nearest({"dd", "dt"}, _DD_BOUNDARY)
        elif tag in ("td", "th"):
            self._close_nearest({"td", "th"}, _TABLE_SCOPE)
        elif tag == "tr":
            self._close_nearest({"tr"}, _TABLE_SCOPE)
        elif tag in ("tbody", "thead", "tfoot"):
            self._close_nearest({"tbody", "thead", "tfoot"}, _TABLE_SCOPE)
        elif tag == "option":
            if self.stack[-1].label == "option":
                self.stack.pop()
        elif tag == "optgroup":
            if self.stack[-1].label == "option":
                self.stack.pop()
            if self.stack[-1].label == "optgroup":
                self.stack.pop()
        elif tag in ("a", "button", "nobr"):
            self._close_nearest({tag}, _SCOPE)
        elif tag in _HEADINGS:
            if self.stack[-1].label in _HEADINGS:
                self.stack.pop()

        # Implied table structure: rows get a tbody, cells get a row, and
        # an open colgroup closes before row content.
        top = self.stack[-1].label
        if top == "colgroup" and tag in ("tr", "td", "th", "tbody", "thead", "tfoot", "caption"):
            self.stack.pop()
            top = self.stack[-1].label
        if tag == "tr" and top == "table":
            self._insert("tbody", push=True)
        elif tag in ("td", "th"):
            if top == "table":
                self._insert("tbody", push=True)
                top = "tbody"
            if top in ("tbody", "thead", "tfoot"):
                self._insert("tr", push=True)
        elif tag == "col" and top == "table":
            self._insert("colgroup", push=True)

        push = tag not in VOID_ELEMENTS and not self_closing
        self._insert(tag, push)

    def _end(self, tag: str) -> None:
        if self.mode in (_BEFORE_HTML, _BEFORE_HEAD):
            return
        if tag in ("body", "html"):
            return  # trailing content still belongs to body
        if self.mode == _IN_HEAD and tag == "head":
            self._pop_through(self.head)
            self.mode = _AFTER_HEAD
            return
        if self.mode == _IN_BODY:
            if tag == "p":
                if not self._close_nearest({"p"}, _BUTTON_SCOPE):
                    self._insert("p", push=False)  # </p> with no open p creates one
                return
            if tag == "br":
                self._insert("br", push=False)
                return
        if tag in _HEADINGS:
            self._close_nearest(_HEADINGS, _SCOPE)
            return
        if tag == "form":
            self._form_open = False
            self._close_nearest({"form"}, _SCOPE)
            return
        if tag == "table":
            self._close_nearest({"table"}, {"html", "body"})
            return
        if tag in ("td", "th", "tr", "tbody", "thead", "tfoot", "caption", "colgroup"):
            self._close_nearest({tag}, _TABLE_SCOPE)
            return
        if tag == "li":
            self._close_nearest({"li"}, _LI_BOUNDARY)
            return
        if tag in ("dd", "dt"):
            self._close_nearest({tag}, _DD_BOUNDARY)
            return
        if tag in _SPECIAL:
            # Structural end tags close across any open descendants, up to
            # a scope boundary.
            self._close_nearest({tag}, _SCOPE)
            return
        # Any other end tag: close the nearest matching element, but never
        # across a "special" element.
        for node in reversed(self.stack):
            if node.label == tag:
                self._pop_through(node)
                return
            if node.label in _SPECIAL:
                return

    def finish(self) -> _RawNode:
        self._ensure_head()
        if self.body is None:
            self._open_body()
        return self.html


_META_CHARSET_RE = re.compile(rb"""charset\s*=\s*["']?\s*([a-zA-Z0-9_\-:.]+)""", re.I)
_XML_DECL_RE = re.compile(rb"""^\s*<\?xml[^>]*encoding\s*=\s*["']([a-zA-Z0-9_\-:.]+)""", re.I)


def decode_document(data: bytes) -> str:
    """Decode HTML bytes: BOM first, then a declared charset in the first
    1024 bytes, then UTF-8 with replacement."""
    if data.startswith(codecs.BOM_UTF8):
        return data[len(codecs.BOM_UTF8):].decode("utf-8", "replace")
    if data.startswith(codecs.BOM_UTF16_LE) or data.startswith(codecs.BOM_UTF16_BE):
        return data.decode("utf-16", "replace")
    prefix = bytes(data[:1024])
    match = _META_CHARSET_RE.search(prefix) or _XML_DECL_RE.match(prefix)
    if match:
        name = match.group(1).decode("ascii", "ignore")
        try:
            info = codecs.lookup(name)
        except LookupError:
            info = None
        # A 16/32-bit declaration inside byte-sniffed ASCII text cannot be
        # accurate; fall back to UTF-8 as for any other failure.
        if info is not None and not info.name.startswith(("utf-16", "utf-32")):
            return data.decode(info.name, "replace")
    return data.decode("utf-8", "replace")


def parse_html(
    document_bytes: bytes | bytearray,
    source_id: str,
    *,
    depth_limit: int = DEFAULT_DEPTH_LIMIT,
) -> DomTree:
    """Parse a (possibly malformed) HTML document into a DomTree.

    Recovery always yields a tree: the degenerate empty input produces
    the minimal ``html(head, body)`` frame with three nodes.  Raises
    :class:`DepthLimitExceeded` when element nesting exceeds
    ``depth_limit``.  :class:`EmptyDocument` is part of the error surface
    for strict front ends but is never raised by this recovery
    discipline.
    """
    text = decode_document(bytes(document_bytes))
    builder = _TreeBuilder(depth_limit=depth_limit)
    builder.feed(text)
    builder.close()
    root = builder.finish()
    return _freeze(root, source_id)


def parse_file(path, *, depth_limit: int = DEFAULT_DEPTH_LIMIT) -> DomTree:
    with open(path, "rb") as handle:
        data = handle.read()
    return parse_html(data, source_id=str(path), depth_limit=depth_limit)


def _freeze(root: _RawNode, source_id: str) -> DomTree:
    """Convert the mutable build tree into an immutable DomTree with dense
    preorder ids (iterative; safe for deep trees)."""
    order: list[_RawNode] = []
    ids: dict[int, int] = {}
    stack = [root]
    while stack:
        node = stack.pop()
        ids[id(node)] = len(order)
        order.append(node)
        stack.extend(reversed(node.children))
    built: dict[int, DomNode] = {}
    for node in reversed(order):
        built[id(node)] = DomNode(
            label=node.label,
            children=tuple(built[id(c)] for c in node.children),
            node_id=ids[id(node)],
        )
    return DomTree(root=built[id(root)], node_count=len(order), source_id=source_id)
