//! Storage SDK look-alike: three modules under `src/main/java`, with the
//! encrypted blob client builder change that adds `sasToken`.

use crate::{expect, text, Change, FixtureCommit, FixtureRepo, A2A, IDSD, MO};

const COMMON: &str = "azure-storage-common/src/main/java";
const BLOB: &str = "azure-storage-blob/src/main/java";
const CRYPTO: &str = "azure-storage-blob-cryptography/src/main/java";

const EBCB_PATH: &str =
    "azure-storage-blob-cryptography/src/main/java/com/azure/storage/blob/cryptography/EncryptedBlobClientBuilder.java";
const BLOB_CLIENT_PATH: &str = "azure-storage-blob/src/main/java/com/azure/storage/blob/BlobClient.java";
const BASE_OLD: &str =
    "azure-storage-blob-cryptography/src/main/java/com/azure/storage/blob/cryptography/implementation/BaseBlobClientBuilder.java";
const BASE_NEW: &str = "azure-storage-blob/src/main/java/com/azure/storage/blob/BaseBlobClientBuilder.java";
const UTILITY: &str = "azure-storage-common/src/main/java/com/azure/storage/common/Utility.java";
const CORE_UTILS: &str = "azure-storage-common/src/main/java/com/azure/storage/common/CoreUtils.java";

const CRYPTO_DESCRIPTOR: &str = "azure-storage-blob-cryptography/src/main/java/module-info.java";

/// Line of the `sasToken` declaration once it exists.
pub const SAS_TOKEN_LINE: usize = 271;

fn base_import(moved: bool) -> &'static str {
    if moved {
        "import com.azure.storage.blob.BaseBlobClientBuilder;"
    } else {
        "import com.azure.storage.blob.cryptography.implementation.BaseBlobClientBuilder;"
    }
}

/// The builder, with or without the SAS token support, importing its base
/// class from its old or new place.
fn builder(with_sas: bool, base_moved: bool) -> String {
    let mut lines: Vec<String> = vec!["package com.azure.storage.blob.cryptography;".into(), String::new()];
    let core_imports = [
        "com.azure.core.credential.TokenCredential",
        "com.azure.core.http.HttpClient",
        "com.azure.core.http.HttpPipeline",
        "com.azure.core.http.policy.HttpLogOptions",
        "com.azure.core.http.policy.HttpPipelinePolicy",
        "com.azure.core.http.policy.RetryPolicy",
        "com.azure.core.http.policy.UserAgentPolicy",
        "com.azure.core.util.Configuration",
        "com.azure.core.util.logging.ClientLogger",
        "com.azure.core.cryptography.AsyncKeyEncryptionKey",
        "com.azure.core.cryptography.AsyncKeyEncryptionKeyResolver",
    ];
    lines.extend(core_imports.iter().map(|i| format!("import {i};")));
    lines.push(base_import(base_moved).into());
    let jdk_imports = [
        "java.net.MalformedURLException",
        "java.net.URL",
        "java.util.ArrayList",
        "java.util.HashMap",
        "java.util.List",
        "java.util.Map",
        "java.util.Objects",
        "java.util.function.Supplier",
        "java.time.Duration",
        "java.nio.ByteBuffer",
        "java.io.IOException",
        "java.io.UncheckedIOException",
        "java.security.InvalidKeyException",
        "java.security.SecureRandom",
    ];
    lines.extend(jdk_imports.iter().map(|i| format!("import {i};")));
    lines.push("import com.azure.storage.common.StorageSharedKeyCredential;".into());
    lines.push("import reactor.core.publisher.Mono;".into());
    if with_sas {
        lines.push("import com.azure.storage.common.SasTokenCredential;".into());
    }
    lines.push(String::new());
    lines.extend(
        [
            "/**",
            " * Builds clients that encrypt blobs on the client side.",
            " */",
            "public class EncryptedBlobClientBuilder extends BaseBlobClientBuilder {",
            "    private final ClientLogger logger = new ClientLogger(EncryptedBlobClientBuilder.class);",
            "    private final Map<String, String> options = new HashMap<>();",
            "    private StorageSharedKeyCredential storageSharedKeyCredential;",
            "    private TokenCredential tokenCredential;",
        ]
        .map(String::from),
    );
    if with_sas {
        lines.push("    private SasTokenCredential sasTokenCredential;".into());
    }
    lines.push(String::new());
    lines.extend(
        [
            "    public EncryptedBlobClientBuilder credential(StorageSharedKeyCredential credential) {",
            "        this.storageSharedKeyCredential = credential;",
            "        this.tokenCredential = null;",
            "        return this;",
            "    }",
            "",
        ]
        .map(String::from),
    );
    for k in 0..37 {
        lines.push(format!(
            "    public EncryptedBlobClientBuilder option{k}(String value) {{"
        ));
        lines.push(format!("        logger.verbose(\"option{k}\");"));
        lines.push(format!("        options.put(\"option{k}\", value);"));
        lines.push("        return this;".into());
        lines.push("    }".into());
        lines.push(String::new());
    }
    if with_sas {
        lines.extend(
            [
                "    public EncryptedBlobClientBuilder sasToken(String sasToken) {",
                "        this.sasTokenCredential = SasTokenCredential.fromSasTokenString(sasToken);",
                "        this.tokenCredential = null;",
                "        this.storageSharedKeyCredential = null;",
                "        return this;",
                "    }",
                "",
            ]
            .map(String::from),
        );
    }
    lines.extend(
        [
            "    public String buildEndpoint() {",
            "        return options.get(\"endpoint\");",
            "    }",
            "}",
        ]
        .map(String::from),
    );
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

fn base_builder(moved: bool) -> String {
    let package = if moved {
        "com.azure.storage.blob"
    } else {
        "com.azure.storage.blob.cryptography.implementation"
    };
    format!(
        "package {package};\n\n{}",
        text(
            r#"
import com.azure.storage.common.StorageSharedKeyCredential;

public abstract class BaseBlobClientBuilder {
    protected String endpoint;

    protected String sign(StorageSharedKeyCredential key) {
        return key.sign(endpoint);
    }
}
"#
        )
    )
}

fn utility(name: &str) -> String {
    format!(
        "package com.azure.storage.common;\n\npublic final class {name} {{\n{}",
        text(
            r#"
    public static final String SLASH = "/";

    public static String urlJoin(String base, String name) {
        return base + SLASH + name;
    }

    public static String trim(String value) {
        return value == null ? "" : value.trim();
    }

    public static boolean isNullOrEmpty(String value) {
        return value == null || value.isEmpty();
    }

    public static String lower(String value) {
        return value.toLowerCase();
    }

    public static int length(String value) {
        return value.length();
    }
}
"#
        )
    )
}

fn blob_client(with_version: bool, utility_class: &str) -> String {
    let mut s = format!(
        "package com.azure.storage.blob;\n\nimport com.azure.storage.common.StorageSharedKeyCredential;\nimport com.azure.storage.common.{utility_class};\n\n"
    );
    s.push_str(&text(
        r#"
public class BlobClient {
    private final String endpoint;

    public BlobClient(String endpoint) {
        this.endpoint = endpoint;
    }
"#,
    ));
    s.push_str(&format!(
        "\n    public String getBlobUrl(String name) {{\n        return {utility_class}.urlJoin(endpoint, name);\n    }}\n"
    ));
    s.push_str(&text(
        r#"

    public void authorize(StorageSharedKeyCredential credential) {
        credential.sign(endpoint);
    }
"#,
    ));
    if with_version {
        s.push_str(&text(
            r#"

    public BlobClient withVersion(BlobServiceVersion version) {
        return new BlobClient(endpoint + "?v=" + version.name());
    }
"#,
        ));
    }
    s.push_str("}\n");
    s
}

fn crypto_descriptor(transitive: bool) -> String {
    let blob = if transitive { "requires transitive" } else { "requires" };
    format!(
        "module com.azure.storage.blob.cryptography {{\n    {blob} com.azure.storage.blob;\n    requires com.azure.storage.common;\n    exports com.azure.storage.blob.cryptography;\n}}\n"
    )
}

pub fn repo() -> FixtureRepo {
    let root = vec![
        Change::write("README.md", "# storage sdk fixture\n"),
        Change::write("pom.xml", "<project><modelVersion>4.0.0</modelVersion></project>\n"),
        Change::write(".gitignore", "target/\n"),
        Change::write(
            format!("{COMMON}/module-info.java"),
            "module com.azure.storage.common {\n    exports com.azure.storage.common;\n}\n".to_string(),
        ),
        Change::write(
            format!("{COMMON}/com/azure/storage/common/StorageSharedKeyCredential.java"),
            text(
                r#"
package com.azure.storage.common;

public final class StorageSharedKeyCredential {
    private final String accountName;

    public StorageSharedKeyCredential(String accountName) {
        this.accountName = accountName;
    }

    public String sign(String value) {
        return accountName + ":" + value;
    }
}
"#,
            ),
        ),
        Change::write(UTILITY, utility("Utility")),
        Change::write(
            format!("{COMMON}/com/azure/storage/common/SasTokenCredential.java"),
            text(
                r#"
package com.azure.storage.common;

public final class SasTokenCredential {
    private final String token;

    private SasTokenCredential(String token) {
        this.token = token;
    }

    public static SasTokenCredential fromSasTokenString(String token) {
        return token == null ? null : new SasTokenCredential(token);
    }

    public String getSasToken() {
        return token;
    }
}
"#,
            ),
        ),
        Change::write(
            format!("{BLOB}/module-info.java"),
            "module com.azure.storage.blob {\n    requires transitive com.azure.storage.common;\n    exports com.azure.storage.blob;\n}\n"
                .to_string(),
        ),
        Change::write(BLOB_CLIENT_PATH, blob_client(false, "Utility")),
        Change::write(
            format!("{BLOB}/com/azure/storage/blob/BlobServiceVersion.java"),
            text(
                r#"
package com.azure.storage.blob;

public enum BlobServiceVersion {
    V2019_02_02,
    V2019_07_07;
}
"#,
            ),
        ),
        Change::write(CRYPTO_DESCRIPTOR, crypto_descriptor(false)),
        Change::write(EBCB_PATH, builder(false, false)),
        Change::write(
            format!("{CRYPTO}/com/azure/storage/blob/cryptography/EncryptionVersion.java"),
            text(
                r#"
package com.azure.storage.blob.cryptography;

public enum EncryptionVersion {
    V1;
}
"#,
            ),
        ),
        Change::write(BASE_OLD, base_builder(false)),
    ];
    FixtureRepo {
        name: "fx-azure",
        commits: vec![
            FixtureCommit {
                label: "initial-modules",
                message: "Add storage common, blob and cryptography modules",
                changes: root,
                expect: expect(true, &[A2A, IDSD, MO], 14, 10, &[8, 9]),
            },
            FixtureCommit {
                label: "blob-version-overload",
                message: "Let blob clients pin a service version",
                changes: vec![Change::write(BLOB_CLIENT_PATH, blob_client(true, "Utility"))],
                expect: expect(true, &[], 1, 0, &[]),
            },
            FixtureCommit {
                label: "sas-token",
                message: "Support SAS tokens in the encrypted blob client builder",
                changes: vec![Change::write(EBCB_PATH, builder(true, false))],
                expect: expect(true, &[IDSD], 1, 1, &[7]),
            },
            FixtureCommit {
                label: "transitive-blob",
                message: "Re-export blob to users of the cryptography module",
                changes: vec![Change::write(CRYPTO_DESCRIPTOR, crypto_descriptor(true))],
                expect: expect(true, &[MO], 1, 1, &[6]),
            },
            FixtureCommit {
                label: "rename-utility",
                message: "Rename Utility to CoreUtils",
                changes: vec![
                    Change::rename(UTILITY, CORE_UTILS, Some(utility("CoreUtils"))),
                    Change::write(BLOB_CLIENT_PATH, blob_client(true, "CoreUtils")),
                ],
                expect: expect(true, &[], 3, 0, &[14]),
            },
            FixtureCommit {
                label: "move-base-builder",
                message: "Move the base builder into the blob module",
                changes: vec![
                    Change::rename(BASE_OLD, BASE_NEW, Some(base_builder(true))),
                    Change::write(EBCB_PATH, builder(true, true)),
                ],
                expect: expect(true, &[A2A, IDSD], 3, 3, &[1, 9]),
            },
        ],
        extra_layouts: vec![],
        aliases: vec![
            ("com.azure.storage.blob.cryptography", "ASBC"),
            ("com.azure.storage.common", "ASC"),
            ("EncryptedBlobClientBuilder", "EBCB"),
            ("SasTokenCredential", "STC"),
        ],
        head_paths: 14,
        descriptors: vec![
            (
                "azure-storage-common/src/main/java/module-info.java",
                vec!["exports com.azure.storage.common"],
            ),
            (
                "azure-storage-blob/src/main/java/module-info.java",
                vec![
                    "requires transitive com.azure.storage.common",
                    "exports com.azure.storage.blob",
                ],
            ),
            (
                CRYPTO_DESCRIPTOR,
                vec![
                    "requires transitive com.azure.storage.blob",
                    "requires com.azure.storage.common",
                    "exports com.azure.storage.blob.cryptography",
                ],
            ),
        ],
    }
}
