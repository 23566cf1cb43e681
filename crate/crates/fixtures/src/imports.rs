//! Import-level hazards: wildcard shrink and expand, commented imports,
//! static and inner-class imports, package renames, a field used by two
//! methods, and the descriptor-plus-two-importers counting scenario.

use crate::{expect, text, Change, FixtureCommit, FixtureRepo, A2A, IDSD, MO};

const CORE: &str = "lib-core/src/main/java";
const EXTRA: &str = "lib-extra/src/main/java";
const APP: &str = "app/src/main/java";
const TOOL: &str = "tool/src/main/java";

fn p(root: &str, rest: &str) -> String {
    format!("{root}/{rest}")
}

fn core_descriptor(io_package: &str, text_package: bool) -> String {
    let mut s = format!("module org.lib.core {{\n    exports org.lib.core;\n    exports org.lib.core.{io_package};\n");
    if text_package {
        s.push_str("    exports org.lib.core.text;\n");
    }
    s.push_str("}\n");
    s
}

fn main_class(wildcard: bool) -> String {
    let imports = if wildcard {
        "import org.lib.core.*;\n"
    } else {
        "import org.lib.core.Engine;\nimport org.lib.core.Strings;\n"
    };
    format!(
        "package org.app;\n\n{imports}{}",
        text(
            r#"

public class Main {
    public static void main(String[] args) {
        Engine engine = new Engine();
        engine.start();
        System.out.println(Strings.join("a", "b"));
    }
}
"#
        )
    )
}

const SERVICE_COMMENT: &str = "/*\nimport org.lib.core.io.Reader;\nimport org.lib.extra.Helper;\n*/\n";

fn service(commented: bool, engine: bool) -> String {
    let mut s = String::from("package org.app;\n\n");
    if engine {
        s.push_str("import org.lib.core.Engine;\n");
    }
    s.push_str("import org.lib.extra.Config;\n");
    if commented {
        s.push_str(SERVICE_COMMENT);
    }
    s.push_str("\npublic class Service {\n    private final Config config = new Config();\n");
    if engine {
        s.push_str("    private final Engine engine = new Engine();\n");
    }
    s.push_str("\n    public String name() {\n        return config.name();\n    }\n");
    if engine {
        s.push_str("\n    public void begin() {\n        engine.start();\n    }\n");
        s.push_str("\n    public void end() {\n        engine.stop();\n    }\n");
    }
    s.push_str("}\n");
    s
}

fn report(stage: u8) -> String {
    match stage {
        0 => text(
            r#"
package org.app;

public class Report {
    public String render(String title) {
        return title;
    }
}
"#,
        ),
        1 => text(
            r#"
package org.app;

import static org.lib.core.Strings.join;

import org.lib.core.Outer.Inner;

public class Report {
    public String render(String title) {
        return join(title, "!");
    }

    public int size(Inner inner) {
        return inner.size();
    }
}
"#,
        ),
        _ => text(
            r#"
package org.app;

import static org.lib.core.Strings.join;

import org.lib.core.Outer.Inner;
import org.lib.core.text.Formatter;

public class Report {
    public String render(String title) {
        return join(Formatter.bold(title), "!");
    }

    public int size(Inner inner) {
        return inner.size();
    }
}
"#,
        ),
    }
}

fn cli(package: &str, formatter: bool) -> String {
    let mut s = format!("package org.tool;\n\nimport org.lib.core.{package}.Reader;\n");
    if formatter {
        s.push_str("import org.lib.core.text.Formatter;\n");
    }
    let call = if formatter {
        "Formatter.bold(new Reader().read(input))"
    } else {
        "new Reader().read(input)"
    };
    s.push_str(&format!(
        "\npublic class Cli {{\n    public String run(String input) {{\n        return {call};\n    }}\n}}\n"
    ));
    s
}

fn reader(package: &str) -> String {
    format!(
        "package org.lib.core.{package};\n\n{}",
        text(
            r#"
public class Reader {
    public String read(String source) {
        return source.trim();
    }

    public int count(String source) {
        return source.length();
    }

    public boolean empty(String source) {
        return source.isEmpty();
    }
}
"#
        )
    )
}

fn config(package: &str, value: &str) -> String {
    format!(
        "package {package};\n\npublic class Config {{\n    public String name() {{\n        return \"{value}\";\n    }}\n}}\n"
    )
}

pub fn repo() -> FixtureRepo {
    let root = vec![
        Change::write(p(CORE, "module-info.java"), core_descriptor("io", false)),
        Change::write(
            p(CORE, "org/lib/core/Strings.java"),
            text(
                r#"
package org.lib.core;

public final class Strings {
    private Strings() {
    }

    public static String join(String a, String b) {
        return a + b;
    }
}
"#,
            ),
        ),
        Change::write(
            p(CORE, "org/lib/core/Engine.java"),
            text(
                r#"
package org.lib.core;

public class Engine {
    public void start() {
    }

    public void stop() {
    }
}
"#,
            ),
        ),
        Change::write(
            p(CORE, "org/lib/core/Outer.java"),
            text(
                r#"
package org.lib.core;

public class Outer {
    public static class Inner {
        public int size() {
            return 0;
        }
    }
}
"#,
            ),
        ),
        Change::write(p(CORE, "org/lib/core/Config.java"), config("org.lib.core", "core")),
        Change::write(p(CORE, "org/lib/core/io/Reader.java"), reader("io")),
        Change::write(
            p(EXTRA, "module-info.java"),
            "module org.lib.extra {\n    requires org.lib.core;\n    exports org.lib.extra;\n}\n",
        ),
        Change::write(p(EXTRA, "org/lib/extra/Config.java"), config("org.lib.extra", "extra")),
        Change::write(
            p(EXTRA, "org/lib/extra/Helper.java"),
            text(
                r#"
package org.lib.extra;

public class Helper {
    public int twice(int value) {
        return value * 2;
    }
}
"#,
            ),
        ),
        Change::write(
            p(APP, "module-info.java"),
            "module org.app {\n    requires org.lib.core;\n    requires org.lib.extra;\n}\n",
        ),
        Change::write(p(APP, "org/app/Main.java"), main_class(false)),
        Change::write(p(APP, "org/app/Service.java"), service(false, false)),
        Change::write(p(APP, "org/app/Report.java"), report(0)),
        Change::write(
            p(TOOL, "module-info.java"),
            "module org.tool {\n    requires org.lib.core;\n}\n",
        ),
        Change::write(p(TOOL, "org/tool/Cli.java"), cli("io", false)),
    ];
    FixtureRepo {
        name: "fx-imports",
        commits: vec![
            FixtureCommit {
                label: "initial-modules",
                message: "Add core, extra, app and tool modules",
                changes: root,
                expect: expect(true, &[A2A, IDSD, MO], 15, 11, &[13]),
            },
            FixtureCommit {
                label: "shrink-imports",
                message: "Collapse core imports in Main",
                changes: vec![Change::write(p(APP, "org/app/Main.java"), main_class(true))],
                expect: expect(true, &[], 1, 0, &[2]),
            },
            FixtureCommit {
                label: "comment-imports",
                message: "Park unused imports in a comment",
                changes: vec![Change::write(p(APP, "org/app/Service.java"), service(true, false))],
                expect: expect(true, &[], 1, 0, &[3]),
            },
            FixtureCommit {
                label: "static-and-inner",
                message: "Render reports with core helpers",
                changes: vec![Change::write(p(APP, "org/app/Report.java"), report(1))],
                expect: expect(true, &[IDSD], 1, 2, &[4]),
            },
            FixtureCommit {
                label: "rename-io-package",
                message: "Rename the io package to stream",
                changes: vec![
                    Change::rename(
                        p(CORE, "org/lib/core/io/Reader.java"),
                        p(CORE, "org/lib/core/stream/Reader.java"),
                        Some(reader("stream")),
                    ),
                    Change::write(p(CORE, "module-info.java"), core_descriptor("stream", false)),
                    Change::write(p(TOOL, "org/tool/Cli.java"), cli("stream", false)),
                ],
                expect: expect(true, &[MO], 4, 2, &[1, 14]),
            },
            FixtureCommit {
                label: "expand-imports",
                message: "Spell out core imports in Main again",
                changes: vec![Change::write(p(APP, "org/app/Main.java"), main_class(false))],
                expect: expect(true, &[], 1, 0, &[2]),
            },
            FixtureCommit {
                label: "engine-field",
                message: "Let the service drive the engine",
                changes: vec![Change::write(p(APP, "org/app/Service.java"), service(true, true))],
                expect: expect(true, &[IDSD], 1, 2, &[7]),
            },
            FixtureCommit {
                label: "text-package",
                message: "Export a text package used by app and tool",
                changes: vec![
                    Change::write(p(CORE, "module-info.java"), core_descriptor("stream", true)),
                    Change::write(
                        p(CORE, "org/lib/core/text/Formatter.java"),
                        text(
                            r#"
package org.lib.core.text;

public final class Formatter {
    public static String bold(String value) {
        return "*" + value + "*";
    }
}
"#,
                        ),
                    ),
                    Change::write(p(APP, "org/app/Report.java"), report(2)),
                    Change::write(p(TOOL, "org/tool/Cli.java"), cli("stream", true)),
                ],
                expect: expect(true, &[A2A, IDSD, MO], 4, 3, &[]),
            },
        ],
        extra_layouts: vec![],
        aliases: vec![],
        head_paths: 16,
        descriptors: vec![
            (
                "lib-core/src/main/java/module-info.java",
                vec![
                    "exports org.lib.core",
                    "exports org.lib.core.stream",
                    "exports org.lib.core.text",
                ],
            ),
            (
                "lib-extra/src/main/java/module-info.java",
                vec!["requires org.lib.core", "exports org.lib.extra"],
            ),
            (
                "app/src/main/java/module-info.java",
                vec!["requires org.lib.core", "requires org.lib.extra"],
            ),
            ("tool/src/main/java/module-info.java", vec!["requires org.lib.core"]),
        ],
    }
}
