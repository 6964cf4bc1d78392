#include "gliq/report.hpp"

namespace gliq {

namespace {

// Keeps the embedded JSON from closing its <script> element early.
std::string script_safe(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '<' && i + 1 < s.size() && (s[i + 1] == '/' || s[i + 1] == '!')) {
      out += "\\u003c";
      continue;
    }
    out += s[i];
  }
  return out;
}

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kStyle = R"css(
body { font-family: sans-serif; margin: 0; color: #222; }
header { background: #2d3e50; color: #fff; padding: 8px 14px; }
header .verdict { float: right; font-weight: bold; }
nav button { margin: 6px 4px 0 14px; padding: 4px 10px; border: 1px solid #999; background: #eee; cursor: pointer; }
nav button.on { background: #fff; border-bottom-color: #fff; }
.tab { display: none; padding: 10px 14px; }
.tab.on { display: flex; gap: 18px; }
#src { font-family: monospace; white-space: pre; background: #fafafa; border: 1px solid #ddd; padding: 8px; min-width: 40%; }
#src .hole { background: #ffe08a; cursor: pointer; }
#src .hole.failed { background: #f4a7a7; }
#src .occ { outline: 2px solid #3b7dd8; }
#side { flex: 1; font-size: 14px; }
.card { border: 1px solid #ccc; margin-bottom: 8px; padding: 6px 8px; }
.card.failed { border-color: #c33; }
.card code { background: #f0f0f0; padding: 0 3px; }
.why { color: #a22; }
table { border-collapse: collapse; }
td, th { border: 1px solid #bbb; padding: 3px 8px; text-align: right; }
#recheck-out { white-space: pre-wrap; font-family: monospace; }
.muted { color: #777; }
)css";

// Minimal viewer. Reads the embedded report; talks to /recheck only when the
// page is served live.
const char* kScript = R"js(
(function () {
  const R = JSON.parse(document.getElementById('gliq-report').textContent);
  const live = document.body.dataset.live === '1';
  const $ = (id) => document.getElementById(id);
  const el = (tag, cls, text) => { const e = document.createElement(tag); if (cls) e.className = cls; if (text !== undefined) e.textContent = text; return e; };
  const chosen = {};

  document.querySelectorAll('nav button').forEach((b) => b.addEventListener('click', () => {
    document.querySelectorAll('nav button, .tab').forEach((x) => x.classList.remove('on'));
    b.classList.add('on');
    $(b.dataset.tab).classList.add('on');
  }));

  // Character offset of a 1-based line/col.
  const lines = R.program.split('\n');
  const offset = (line, col) => {
    let o = 0;
    for (let i = 0; i < line - 1 && i < lines.length; i++) o += lines[i].length + 1;
    return o + col - 1;
  };

  function renderSource(mark) {
    const src = $('src');
    src.textContent = '';
    const spans = R.sources.map((s) => ({ s, a: offset(s.span.line, s.span.col), b: offset(s.span.end_line, s.span.end_col) }))
      .sort((x, y) => x.a - y.a);
    let at = 0;
    const text = R.program;
    for (const h of spans) {
      if (h.a < at) continue;
      src.appendChild(document.createTextNode(text.slice(at, h.a)));
      const failed = h.s.occurrences.some((o) => R.occurrences[o].scs.length === 0);
      const e = el('span', 'hole' + (failed ? ' failed' : ''), text.slice(h.a, h.b));
      e.title = '? #' + h.s.id;
      e.addEventListener('click', () => showSource(h.s.id));
      src.appendChild(e);
      at = h.b;
    }
    src.appendChild(document.createTextNode(text.slice(at)));
    if (mark) {
      const a = offset(mark.line, mark.col), b = offset(mark.end_line, mark.end_col);
      // Re-wrap the blamed region for highlighting when it lies in plain text.
      const walker = document.createTreeWalker(src, NodeFilter.SHOW_TEXT);
      let pos = 0, n;
      while ((n = walker.nextNode())) {
        const len = n.textContent.length;
        if (n.parentNode === src && a >= pos && b <= pos + len && b > a) {
          const r = document.createRange();
          r.setStart(n, a - pos); r.setEnd(n, b - pos);
          r.surroundContents(el('span', 'occ'));
          break;
        }
        pos += len;
      }
    }
  }

  const STAGE = {
    all: 'no candidate refinements could be formed from the qualifiers in scope',
    sensible: 'every candidate was rejected as nonsensical',
    local: 'no candidate is satisfiable together with the static part',
    specific: 'no candidate is at least as specific as the static part',
    valid: 'no candidate makes the constraints at this occurrence valid',
  };

  function occurrenceCard(o) {
    const card = el('div', 'card' + (o.scs.length ? '' : ' failed'));
    const head = el('div', null, 'occurrence ' + o.id + ' in ' + o.def + ' at ' + o.span.line + ':' + o.span.col);
    head.style.cursor = 'pointer';
    head.addEventListener('click', () => renderSource(o.span));
    card.appendChild(head);
    if (!o.scs.length) {
      card.appendChild(el('div', 'why', 'no safe concretization: ' + (STAGE[o.emptied] || o.emptied)));
      return card;
    }
    let i = 0;
    const row = el('div');
    const prev = el('button', null, '<'), next = el('button', null, '>');
    const shown = el('code'), count = el('span', 'muted');
    const update = () => { shown.textContent = o.scs[i]; count.textContent = ' ' + (i + 1) + '/' + o.scs.length; };
    prev.addEventListener('click', () => { i = (i + o.scs.length - 1) % o.scs.length; update(); });
    next.addEventListener('click', () => { i = (i + 1) % o.scs.length; update(); });
    const pick = el('button', null, 'use');
    pick.disabled = !live;
    pick.title = live ? 'use this refinement for this occurrence' : 'recheck needs a running gliq serve';
    pick.addEventListener('click', () => { chosen[o.id] = o.scs[i]; renderChoices(); });
    row.append(prev, ' ', shown, ' ', next, count, ' ', pick);
    update();
    card.appendChild(row);
    return card;
  }

  function showSource(id) {
    const s = R.sources[id];
    const side = $('side');
    side.textContent = '';
    side.appendChild(el('h3', null, '? #' + s.id + ' in ' + s.owner));
    side.appendChild(el('div', null, '{' + s.binder + ':' + s.sort + ' | ' + (s.static === 'true' ? '?' : s.static + ' && ?') + '}'));
    const c = s.candidates;
    side.appendChild(el('div', 'muted', 'candidates ' + c.all + ' / sensible ' + c.sensible + ' / local ' + c.local + ' / specific ' + c.specific));
    for (const o of s.occurrences) side.appendChild(occurrenceCard(R.occurrences[o]));
    side.appendChild(el('div', 'muted', 'static solutions: ' + (s.static_solutions.join(' | ') || 'none')));
    renderChoices();
    renderSource(null);
  }

  function renderChoices() {
    const box = $('recheck');
    if (!box) return;
    const ids = Object.keys(chosen);
    $('choices').textContent = ids.length ? ids.map((k) => 'occurrence ' + k + ': ' + chosen[k]).join('\n') : 'nothing chosen';
  }

  function overview() {
    const side = $('side');
    side.textContent = '';
    if (!R.sources.length) {
      side.appendChild(el('p', null, 'no gradual refinements'));
    } else {
      side.appendChild(el('p', 'muted', 'click a highlighted ? to inspect it'));
      for (const o of R.occurrences) if (!o.scs.length) side.appendChild(occurrenceCard(o));
    }
    for (const e of R.errors) side.appendChild(el('div', 'card failed', e.def + ' ' + e.span.line + ':' + e.span.col + ': ' + e.message));
    for (const w of R.warnings) side.appendChild(el('div', 'card', 'warning: ' + w));
    if (R.types.length) {
      const t = el('div', 'card');
      for (const [n, ty] of Object.entries(R.types[0])) t.appendChild(el('div', null, n + ' :: ' + ty));
      side.appendChild(t);
    }
  }

  function metrics() {
    const m = R.metrics;
    const cols = ['ND', 'GRAD', 'OCCS', 'CANDS', 'SENS', 'LOCAL', 'PRECISE', 'PARTS', 'INSTAN', 'SOLS', 'STATIC', 'TIME'];
    const vals = [m.ND, m.GRAD, m.OCCS, m.CANDS, m.SENS, m.LOCAL, m.PRECISE, m.GRAD_PARTS + '/' + m.PARTS, m.INSTAN, '[' + m.SOLS.join(',') + ']', m.STATIC, m.TIME.toFixed(2)];
    const t = el('table');
    const h = el('tr'), r = el('tr');
    cols.forEach((c) => h.appendChild(el('th', null, c)));
    vals.forEach((v) => r.appendChild(el('td', null, String(v))));
    t.append(h, r);
    $('metrics-table').appendChild(t);
    const parts = $('partitions');
    for (const p of R.partitions) {
      const c = el('div', 'card', 'partition ' + p.id + ': ' + p.constraints.length + ' constraints, ' + p.kvars.length + ' liquid variables');
      if (p.occurrences.length) c.appendChild(el('div', 'muted', 'occurrences ' + p.occurrences.join(', ') + ', ' + p.scs.length + ' safe concretizations'));
      parts.appendChild(c);
    }
  }

  if (live) {
    $('recheck').hidden = false;
    $('run').addEventListener('click', async () => {
      const body = { occurrences: chosen };
      const res = await fetch('/recheck', { method: 'POST', headers: { 'Content-Type': 'application/json' }, body: JSON.stringify(body) });
      const j = await res.json();
      if (!res.ok) { $('recheck-out').textContent = 'error: ' + (j.error || res.status); return; }
      $('recheck-out').textContent = j.ok ? 'well-typed' : j.errors.map((e) => e.def + ' ' + e.span.line + ':' + e.span.col + ': ' + e.message).join('\n');
    });
  }
  renderSource(null);
  overview();
  metrics();
})();
)js";

}  // namespace

std::string export_html(const ReportDocument& doc, bool live) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>gliq: ";
  out += escape_text(doc.file);
  out += "</title>\n<style>";
  out += kStyle;
  out += "</style>\n</head>\n<body data-live=\"";
  out += live ? "1" : "0";
  out += "\">\n<header>";
  out += escape_text(doc.file);
  out += "<span class=\"verdict\">";
  out += escape_text(doc.verdict);
  out += "</span></header>\n";
  out += "<nav><button class=\"on\" data-tab=\"program-tab\">Program</button>"
         "<button data-tab=\"metrics-tab\">Metrics</button></nav>\n";
  out += "<section id=\"program-tab\" class=\"tab on\"><div id=\"src\">";
  out += escape_text(doc.program);
  out += "</div><div id=\"side\">";
  // Readable without scripts; the viewer replaces it.
  if (doc.sources.empty()) out += "<p>no gradual refinements</p>";
  for (const auto& o : doc.occurrences) {
    if (!o.scs.empty()) continue;
    out += "<div class=\"card failed\">occurrence " + std::to_string(o.id) + " in " + escape_text(o.def) + " at " +
           o.span.str() + "<div class=\"why\">no safe concretization: " + escape_text(explain_stage(o.emptied)) +
           "</div></div>";
  }
  out += "</div></section>\n";
  out += "<section id=\"metrics-tab\" class=\"tab\"><div><div id=\"metrics-table\"></div><div id=\"partitions\"></div></div></section>\n";
  out += "<section id=\"recheck\" hidden><h4>recheck</h4><pre id=\"choices\">nothing chosen</pre>"
         "<button id=\"run\">recheck</button><div id=\"recheck-out\"></div></section>\n";
  if (!live) out += "<p class=\"muted\" style=\"padding:0 14px\">static export: recheck is disabled</p>\n";
  out += "<script type=\"application/json\" id=\"gliq-report\">";
  out += script_safe(to_json(doc).dump());
  out += "</script>\n<script>";
  out += kScript;
  out += "</script>\n</body>\n</html>\n";
  return out;
}

}  // namespace gliq
