#!/usr/bin/env python3
# Regenerates the test fixtures: bug-report corpora, section labels,
# simulator screens and scripted transcripts. Output is deterministic.
#
#   python3 tests/fixtures/generate_fixtures.py

import json
import shutil
from pathlib import Path

from PIL import Image, ImageDraw

ROOT = Path(__file__).resolve().parent

# Each report: id, source, title, and the section contents it is rendered
# from. `style` picks the body layout. Reports marked label=True are the
# hand-labeled extraction set.
R = []


def report(id, source, title, style="bugzilla", pre=None, s2r=None, eb=None, ob=None, label=False, raw=None, crlf=False):
    R.append(dict(id=id, source=source, title=title, style=style, pre=pre, s2r=s2r, eb=eb, ob=ob, label=label, raw=raw,
                  crlf=crlf))


# hub: Go to Tabs Tray and its spellings
report("bz-1001", "bugzilla", "Tab thumbnails are blank in the tabs tray",
       s2r=["Open Firefox", "Open three websites in new tabs", "Go to Tabs Tray"],
       eb=["Thumbnails should be displayed properly in the Tabs Tray"],
       ob=["All thumbnails are grey rectangles"], label=True)
report("bz-1002", "bugzilla", "Private tab missing from the private section",
       style="github", pre=["Private browsing is enabled"],
       s2r=["Open a private tab", "Go to the Tabs Tray"],
       eb=["The private tab should be listed under Private tabs"],
       ob=["The private section is empty"], label=True)
report("gh-2001", "github_issue", "Tab counter out of sync",
       style="github", s2r=["Open Firefox", "Open two new tabs", "go to tabs tray"],
       eb=["The tab counter should match the number of open tabs"],
       ob=["The counter shows one tab too many"], label=True)
report("bz-1003", "bugzilla", "Tabs tray opens with a delay",
       style="bold", s2r=["Load a heavy page", "Go to the tabs tray"],
       eb=["The tray should open within a second"],
       ob=["The tray takes four seconds to appear"], label=True)
report("bz-1004", "bugzilla", "Three dots menu in tabs tray inaccessible",
       style="inline", s2r=["Open Tabs Tray", "Tap three dots"],
       eb=["The menu should list Recently closed tabs"], label=True)
report("bz-1005", "bugzilla", "Find in Page misses later matches",
       s2r=["Open any website", "Tap the three dots menu", "Select Find in page", "Type a word that appears on the page"],
       eb=["Every match on the page should be highlighted"],
       ob=["Only the first match is highlighted"], label=True)
report("bz-1006", "bugzilla", "Closed tab not restored by UNDO",
       s2r=["Open two tabs", "Close a tab from the tabs tray", "Tap UNDO on the Tab closed banner"],
       eb=["The closed tab should reappear with its content preview"],
       ob=["The tab reappears without a preview"], label=True)
report("gh-2002", "github_issue", "UNDO highlights two tabs",
       style="github", s2r=["Close the last tab in the tray", "Tap UNDO"],
       eb=["Only the restored tab should be highlighted"],
       ob=["The last two tabs are highlighted"], label=True)
report("bz-1007", "bugzilla", "Tooltip text missing on tabs tray button",
       s2r=["Long press the tabs tray button"],
       eb=["Tooltip should display explanatory text"],
       ob=["An empty tooltip appears"], label=True)
report("bz-1008", "bugzilla", "Bookmark star does not fill",
       style="star", s2r=["Open a website", "Tap the star icon in the toolbar"],
       eb=["The star icon should turn blue after bookmarking"], label=True)
report("bz-1009", "bugzilla", "Bookmarks list not refreshed",
       s2r=["Bookmark the current page", "Open the bookmarks list"],
       eb=["The new bookmark should appear at the top of the list"],
       ob=["The list still shows old entries"], label=True)
report("gh-2003", "github_issue", "Reader view button hidden",
       style="github", pre=["An article page is open"],
       s2r=["Scroll the article to the middle", "Look at the address bar"],
       eb=["The reader view icon should stay visible"], label=True)
report("bz-1010", "bugzilla", "Download notification stuck",
       style="dash", s2r=["Download a PDF file", "Wait for the download to finish"],
       eb=["The notification should say Download complete"],
       ob=["The progress bar stays at 99 percent"], label=True)
report("bz-1011", "bugzilla", "Search suggestions overlap keyboard",
       s2r=["Tap the address bar", "Type firefox"],
       eb=["Search suggestions should be fully visible above the keyboard"], label=True)
report("gh-2004", "github_issue", "Landscape toolbar clipped",
       style="github", s2r=["Open a website", "Rotate the device to landscape"],
       eb=["The toolbar should span the full screen width"],
       ob=["The right part of the toolbar is cut off"], label=True)
report("bz-1012", "bugzilla", "History entry opens wrong page",
       style="reproduce", s2r=["Open the history panel", "Tap the most recent entry"],
       eb=["The page from the selected entry should load"], label=True)
report("bz-1013", "bugzilla", "Collections screen empty after save",
       s2r=["Open the tabs tray", "Tap Save to collection", "Choose a new collection name"],
       eb=["The collection should appear on the home screen"], label=True)
report("gh-2005", "github_issue", "Dark theme not applied to menus",
       style="github", pre=["Dark theme is selected in settings"],
       s2r=["Open the three dots menu"],
       eb=["Menus should use the dark background"],
       ob=["The menu is white"], label=True)
report("pr-3001", "github_pr", "Fix share sheet title",
       style="github", s2r=["Open a website", "Tap Share in the three dots menu"],
       eb=["The share sheet should show the page title"], label=True)
report("bz-1014", "bugzilla", "Top sites tile cannot be removed",
       s2r=["Long press a top sites tile", "Select Remove"],
       eb=["The tile should disappear from top sites"],
       ob=["The tile comes back after restart"], label=True)
# unlabeled remainder of the corpus
report("bz-1015", "bugzilla", "Login prompt appears twice",
       s2r=["Open a site that needs a login", "Save the password", "Reload the page"],
       eb=["The saved login should be filled without asking again"])
report("bz-1016", "bugzilla", "Address bar keeps old URL",
       s2r=["Open a website", "Follow a link on the page"],
       eb=["The address bar should show the new URL"], crlf=True)
report("gh-2006", "github_issue", "Pull to refresh jumps",
       style="github", s2r=["Open a long page", "Pull down to refresh"],
       eb=["The page should reload while staying at the top"])
report("bz-1017", "bugzilla", "Desktop site toggle ignored",
       s2r=["Open a mobile site", "Enable Desktop site in the menu"],
       eb=["The desktop version of the site should load"])
report("bz-1018", "bugzilla", "Zoom level resets", style="dash",
       s2r=["Pinch to zoom on a page", "Switch to another tab", "Switch back"],
       eb=["The zoom level should be kept per tab"])
report("gh-2007", "github_issue", "Add-on icon missing from menu", style="github",
       s2r=["Install an add-on", "Open the three dots menu"],
       eb=["The menu should show the add-on entry"])
report("bz-1019", "bugzilla", "Close all tabs leaves one tab",
       s2r=["Open five tabs", "Select Close all tabs in the tabs tray menu"],
       eb=["No tabs should remain open"])
report("bz-1020", "bugzilla", "Homepage shortcut unresponsive",
       s2r=["Open the home screen", "Tap a pinned shortcut"],
       eb=["The pinned site should open in the current tab"])
report("bz-1021", "bugzilla", "Text selection handles misplaced", style="bold",
       s2r=["Long press a word on the page"],
       eb=["Selection handles should appear at both ends of the word"])
report("pr-3002", "github_pr", "Restore scroll position after back", style="github",
       s2r=["Scroll a long page", "Open a link", "Press back"],
       eb=["The previous scroll position should be restored"])
report("bz-1023", "bugzilla", "Menu closes on rotation", style="dash",
       s2r=["Open the three dots menu", "Rotate the device to portrait"],
       eb=["The menu should stay open after rotation"])
report("gh-2008", "github_issue", "Keyboard covers login field", style="github",
       s2r=["Open a login form", "Tap the password field"],
       eb=["The page should scroll so the field stays visible"])
report("bz-1024", "bugzilla", "Recently closed tabs list empty",
       s2r=["Close a tab", "Open Recently closed tabs from the tray menu"],
       eb=["The closed tab should be listed in Recently closed tabs"])
report("bz-1025", "bugzilla", "Settings search returns nothing",
       s2r=["Open Settings", "Search for cookies"],
       eb=["The cookie settings should be found"])
report("bz-1026", "bugzilla", "Enter key does not submit search",
       s2r=["Type a query in the address bar", "Press enter on the keyboard"],
       eb=["The search results page should open"])
report("gh-2009", "github_issue", "Home button missing after update", style="github",
       s2r=["Update the browser", "Open any website"],
       eb=["The home button should be shown in the toolbar"])
report("bz-1027", "bugzilla", "Media controls disappear",
       s2r=["Play a video", "Press home"],
       eb=["Media controls should remain in the notification area"])
report("bz-1028", "bugzilla", "Sync badge stale", style="star",
       s2r=["Sign in to sync", "Open the account menu"],
       eb=["The account menu should show the last sync time"])
report("pr-3003", "github_pr", "Cookie banner handling", style="github",
       s2r=["Enable cookie banner reduction", "Open a news site"],
       eb=["The cookie banner should be dismissed automatically"])
report("bz-1030", "bugzilla", "Tabs tray grid layout uneven",
       pre=["Grid view is enabled for tabs"],
       s2r=["Open six tabs", "Open the tab grid"],
       eb=["Tab cards should line up in two equal columns"])
report("bz-1031", "bugzilla", "Startup crash without steps",
       eb=["The browser should start without crashing"])
report("gh-2010", "github_issue", "Long press link menu incomplete", style="github",
       s2r=["Long press a link"],
       eb=["The context menu should offer Open in private tab"])
# three reports with no scenario knowledge
report("gh-2011", "github_issue", "Random crash", style="raw",
       raw="It just crashes sometimes, no idea why.\nHappens on my phone.\n")
report("bz-1032", "bugzilla", "Only actual behavior given", style="raw",
       raw="Actual behavior:\nThe page flickers when scrolling.\n")
report("man-0001", "manual", "Placeholder note", style="raw", raw="")

# a jsonl export holding the rest
EXPORT = [
    dict(id="gh-2012", source="github_issue", title="Swipe to close tab sticks",
         body="### Steps to reproduce\n1. Open the tabs tray\n2. Swipe a tab to the left\n\n### Expected behavior\nThe swiped tab should be closed\n"),
    dict(id="gh-2013", source="github_issue", title="Search engine icon blank",
         body="### Steps to reproduce\n1. Tap the address bar\n2. Tap the search engine icon\n\n### Expected behavior\nEach search engine should show its icon\n"),
    dict(id="gh-2014", source="github_issue", title="Translation prompt persists",
         body="### Steps to reproduce\n1. Open a page in another language\n2. Dismiss the translation prompt\n\n### Expected behavior\nThe translation prompt should not return on reload\n"),
    dict(id="pr-3004", source="github_pr", title="Fix PDF viewer page count",
         body="Steps to reproduce:\n- Open a PDF with ten pages\n- Scroll to the end\n\nExpected result:\n- The page indicator should read 10 of 10\n"),
    dict(id="pr-3005", source="github_pr", title="Show tab count in private mode",
         body="STR:\n* Switch to private browsing\n* Open two private tabs\n\nEB:\n* The private tab counter should show 2\n"),
]


def render(r):
    if r["style"] == "raw":
        return r["raw"]
    s = r["style"]
    out = []

    def section(heading, items, numbered):
        if not items:
            return
        if s == "github":
            out.append(f"### {heading}")
        elif s == "bold":
            out.append(f"**{heading}**")
        else:
            out.append(f"{heading}:")
        for i, it in enumerate(items, 1):
            if numbered and s in ("bugzilla", "github", "bold", "reproduce"):
                out.append(f"{i}. {it}")
            elif s == "star":
                out.append(f"* {it}")
            else:
                out.append(f"- {it}")
        out.append("")

    out.append("Found while testing the nightly build.")
    out.append("")
    if r["pre"]:
        section("Prerequisites", r["pre"], False)
    if s == "inline":
        out.append("S2R: " + " ".join(f"{i}. {t}" for i, t in enumerate(r["s2r"], 1)))
        out.append("")
    elif s == "reproduce":
        out.append("Reproduce")
        for i, it in enumerate(r["s2r"] or [], 1):
            out.append(f"{i}) {it}")
        out.append("")
    else:
        section("Steps to reproduce", r["s2r"], True)
    section("Expected behavior" if s != "dash" else "Expected result", r["eb"], False)
    section("Actual behavior" if s != "dash" else "Actual result", r["ob"], False)
    out.append("Affected versions:")
    out.append("Nightly 131")
    return "\n".join(out) + "\n"


def write_corpus():
    d = ROOT / "corpus"
    if d.exists():
        shutil.rmtree(d)
    d.mkdir()
    oracles = []
    for r in R:
        header = f"id: {r['id']}\nsource: {r['source']}\ntitle: {r['title']}\n---\n"
        text = header + render(r)
        if r["crlf"]:
            text = text.replace("\n", "\r\n")
        (d / f"{r['id']}.md").write_bytes(text.encode())
        oracles += r["eb"] or []
    with open(d / "export.jsonl", "w") as f:
        for e in EXPORT:
            f.write(json.dumps(e) + "\n")
    for e in EXPORT:
        for line in e["body"].splitlines():
            t = line.lstrip("-* ").strip()
            if t and "should" in t:
                oracles.append(t)
    assert len(R) + len(EXPORT) == 50, len(R) + len(EXPORT)
    assert len(set(oracles)) == len(oracles), "oracle texts must be unique"
    for a in oracles:
        for b in oracles:
            assert a == b or a not in b, (a, b)

    labels = {}
    for r in R:
        if not r["label"]:
            continue
        labels[r["id"]] = dict(title=r["title"], prerequisites=r["pre"], s2rs=r["s2r"], ebs=r["eb"], obs=r["ob"])
    assert len(labels) == 20
    (ROOT / "corpus_labels.json").write_text(json.dumps(labels, indent=2) + "\n")


PODCAST = [
    ("ap-01", "Episode list unsorted", ["Open a podcast", "Look at the episode list"],
     ["Episodes should be sorted newest first"]),
    ("ap-02", "Speed button unlabeled", ["Open a podcast", "Play the latest episode"],
     ["The playback speed button should show the current speed"]),
    ("ap-03", "Queue not updated", ["Add an episode to the queue", "Open the queue"],
     ["The queued episode should be listed"]),
    ("ap-04", "Download icon stuck", ["Download an episode", "Open the downloads screen"],
     ["Finished downloads should show a check mark"]),
    ("ap-05", "Sleep timer ignored", ["Play an episode", "Set the sleep timer to five minutes"],
     ["Playback should stop when the timer ends"]),
]


def write_podcast_corpus():
    d = ROOT / "podcast_corpus"
    if d.exists():
        shutil.rmtree(d)
    d.mkdir()
    for id, title, steps, ebs in PODCAST:
        body = "Steps to reproduce:\n" + "".join(f"{i}. {s}\n" for i, s in enumerate(steps, 1))
        body += "\nExpected behavior:\n" + "".join(f"{e}\n" for e in ebs)
        (d / f"{id}.md").write_text(f"id: {id}\nsource: github_issue\ntitle: {title}\n---\n{body}")


# Simulator screens

W, H = 1080, 2400


def cell_box(label, cols=11, cell=100):
    r, c = divmod(label - 1, cols)
    return (c * cell + 8, r * cell + 8, c * cell + cell - 8, r * cell + cell - 8)


def screen(path, bg, blocks):
    img = Image.new("RGB", (W, H), bg)
    d = ImageDraw.Draw(img)
    d.rectangle((0, 180, W, 320), fill=(60, 60, 80))  # toolbar
    for box, color, text in blocks:
        d.rectangle(box, fill=color)
        if text:
            d.text((box[0] + 10, box[1] + 10), text, fill=(0, 0, 0))
    img.save(path, optimize=False)


def write_tabs_sim():
    d = ROOT / "sim" / "tabs"
    d.mkdir(parents=True, exist_ok=True)
    tabs_button = (cell_box(32), (240, 240, 240), "2")
    page = ((40, 400, 1040, 2200), (250, 250, 245), "A news article")
    screen(d / "home.png", (255, 255, 255), [tabs_button, page])
    # tabs tray: two tab cards whose thumbnails are blank (the seeded defect)
    card1 = ((40, 380, 1040, 900), (200, 200, 200), "Tab 1: News")
    card2 = ((40, 950, 1040, 1470), (200, 200, 200), "Tab 2: Weather")
    close1 = (cell_box(53), (220, 80, 80), "x")
    screen(d / "tabs_tray.png", (235, 235, 240), [card1, close1, card2])
    banner = ((0, 2100, W, 2300), (40, 40, 40), "Tab closed")
    undo = (cell_box(251), (90, 160, 255), "UNDO")
    screen(d / "tabs_tray_closed.png", (235, 235, 240), [card2, banner, undo])
    reopened = ((40, 380, 1040, 900), (210, 230, 255), "Tab 1: News (restored)")
    screen(d / "tabs_tray_restored.png", (235, 235, 240), [reopened, card2])
    screen(d / "browsing.png", (255, 255, 255), [tabs_button, page])
    (d / "tabs.sim").write_text(
        "soap-sim 1\n"
        "# browser: close a tab, reopen it, select it\n"
        "cell 100\n"
        "screen home home.png\n"
        "screen tabs_tray tabs_tray.png\n"
        "screen tabs_tray_closed tabs_tray_closed.png\n"
        "screen tabs_tray_restored tabs_tray_restored.png\n"
        "screen browsing browsing.png\n"
        "start home\n"
        "home home\n"
        "on home tap 32 -> tabs_tray\n"
        "on browsing tap 32 -> tabs_tray\n"
        "on tabs_tray tap 53 -> tabs_tray_closed\n"
        "on tabs_tray_closed tap 251 -> tabs_tray_restored\n"
        "on tabs_tray_restored tap 41-44 -> browsing\n"
        "defect tabs_tray thumbnails-blank Tab thumbnails render as blank cards\n"
    )


def write_podcast_sim():
    d = ROOT / "sim" / "podcast"
    d.mkdir(parents=True, exist_ok=True)
    show = (cell_box(57), (255, 200, 120), "Show")
    screen(d / "library.png", (250, 250, 250), [show])
    ep = ((40, 380, 1040, 560), (230, 230, 230), "Episode 12")
    screen(d / "episodes.png", (250, 250, 250), [ep])
    speed = (cell_box(211), (200, 200, 200), "")
    screen(d / "player.png", (30, 30, 30), [speed])
    (d / "podcast.sim").write_text(
        "soap-sim 1\n"
        "cell 100\n"
        "screen library library.png\n"
        "screen episodes episodes.png\n"
        "screen player player.png\n"
        "start library\n"
        "on library tap 57 -> episodes\n"
        "on episodes tap 45 -> player\n"
        "defect player speed-unlabeled Playback speed button has no label\n"
    )


# Transcripts

def plan(next_step, subs):
    return json.dumps({"NEXT STEP": next_step, "SUB STEPS": subs})


def entry(role, turn, response):
    return json.dumps({"role": role, "turn": turn, "response": response})


def transcript(path, planner, player, detector):
    lines = []
    for role, replies in (("planner", planner), ("player", player), ("detector", detector)):
        for i, r in enumerate(replies, 1):
            lines.append(entry(role, i, r))
    path.write_text("\n".join(lines) + "\n")


NO_FINDINGS = json.dumps({"findings": []})


def write_transcripts():
    d = ROOT / "transcripts"
    d.mkdir(exist_ok=True)
    thumbs = {
        "summary": "Tab thumbnails not displaying content previews correctly",
        "s2rs": ["Open a website", "Click on the tabs tray"],
        "ebs": ["Each tab card shows a preview of its page"],
        "obs": ["Tab cards are blank grey rectangles"],
        "violated_oracles": [
            {"text": "Thumbnails should be displayed properly in the Tabs Tray", "origin": "retrieved"},
        ],
    }
    transcript(
        d / "tabs.jsonl",
        planner=[
            plan("Close a tab", ["Click on the tabs tray", "Tap the close button of the first tab"]),
            plan("Reopen the closed tab", ["Tap UNDO on the Tab closed banner"]),
            plan("Select the reopened tab", ["Tap the reopened tab"]),
            plan("DONE", []),
        ],
        player=[
            # first reply is fenced, as chat models often answer
            "```json\n" + json.dumps({"action": "tap", "position": 32}) + "\n```",
            json.dumps({"action": "tap", "position": 53}),
            json.dumps({"action": "tap", "position": 251}),
            json.dumps({"action": "tap", "arguments": {"position": 42}}),
        ],
        detector=[json.dumps({"findings": [thumbs]}), NO_FINDINGS, NO_FINDINGS, NO_FINDINGS],
    )
    # detector turns for the oracle-knowledge ablation rerun
    generic = dict(thumbs)
    generic["violated_oracles"] = [{"text": "Tab cards should show page previews", "origin": "generated"}]
    spurious = {
        "summary": "Banner hides the bottom toolbar",
        "obs": ["The Tab closed banner covers the toolbar"],
    }
    lines = [
        entry("detector", 1, json.dumps({"findings": [generic]})),
        entry("detector", 2, json.dumps({"findings": [spurious]})),
        entry("detector", 3, NO_FINDINGS),
        entry("detector", 4, NO_FINDINGS),
    ]
    (d / "tabs_no_oracle_detector.jsonl").write_text("\n".join(lines) + "\n")

    speed = {
        "summary": "Playback speed button shows no label",
        "ebs": ["The playback speed button should show the current speed"],
        "obs": ["The speed button is an empty grey square"],
        "violated_oracles": [{"text": "The playback speed button should show the current speed", "origin": "retrieved"}],
    }
    order = {"summary": "Episode list shows a single episode", "obs": ["Only one episode is listed"]}
    transcript(
        d / "podcast.jsonl",
        planner=[
            plan("Open a podcast", ["Tap the show in the library"]),
            plan("Play the latest episode", ["Tap the newest episode"]),
            plan("DONE", []),
        ],
        player=[json.dumps({"action": "tap", "position": 57}), json.dumps({"action": "tap", "position": 45})],
        detector=[json.dumps({"findings": [order]}), json.dumps({"findings": [speed]})],
    )
    lines = [
        entry("detector", 1, NO_FINDINGS),
        entry("detector", 2, json.dumps({"findings": [{"summary": "Player screen is too dark", "obs": ["Dark background"]}]})),
    ]
    (d / "podcast_no_oracle_detector.jsonl").write_text("\n".join(lines) + "\n")


def write_tests():
    d = ROOT / "tests"
    d.mkdir(exist_ok=True)
    (d / "tabs.test").write_text(
        "id: tabs-close-reopen\napp: firefox\nsource: manual\n---\n"
        "Close a tab\nReopen the closed tab\nSelect the reopened tab\n"
    )
    (d / "podcast.test").write_text(
        "id: podcast-play\napp: podcast\nsource: manual\n---\nOpen a podcast\nPlay the latest episode\n"
    )
    # verdicts for the evaluation suite (run directory name / finding number)
    labels = {
        "firefox/001": "TP",
        "firefox-no-oracle-knowledge/001": "TP",
        "firefox-no-oracle-knowledge/002": "FP",
        "podcast/001": "FP",
        "podcast/002": "TP",
        "podcast-no-oracle-knowledge/001": "FP",
    }
    (ROOT / "suite_labels.json").write_text(json.dumps(labels, indent=2) + "\n")


if __name__ == "__main__":
    write_corpus()
    write_podcast_corpus()
    write_tabs_sim()
    write_podcast_sim()
    write_transcripts()
    write_tests()
